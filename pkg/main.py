"""
Eposic command-line entry point

Run with:
    python main.py choi --m 1 --n 2 --h 1 --exact
    python main.py selftest --max-degree 3
"""

from Eposic.cli import main

if __name__ == "__main__":
    main()
