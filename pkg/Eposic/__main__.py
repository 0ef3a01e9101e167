from Eposic.cli import main

main()
