# Eposic package: exact SU(2) Clebsch–Gordan isometries and covariant channels
