"""Published reference values, used as fixed targets."""

# minimal polynomials, constant term first
MINPOLY = {
    13: (-1, -1, 5, 4, -6, -3, 1),
    17: (1, 1, -7, -6, 15, 10, -10, -4, 1),
    21: (1, -1, -6, 6, 8, -8, 1),
}
MU2 = {13: -1.41002, 17: -1.82706, 21: 1.36858}

# y_{n,j}; a short tuple is the unit vector
Y_VECTORS = {
    13: [(1,), (-4, 1, 10, -3, -4, 1), (5, -4, -20, 11, 11, -3), (0, 5, 5, -11, -6, 2),
         (-5, 0, 16, -5, -8, 2), (4, -5, -15, 14, 10, -3), (-1, 5, 4, -6, -3, 1)],
    17: [(1,), (-6, 1, 21, -5, -20, 6, 5, -1), (14, -6, -70, 29, 85, -33, -24, 5),
         (-14, 14, 84, -64, -126, 67, 41, -9), (0, -14, -14, 56, 42, -48, -20, 5),
         (14, 0, -70, 14, 90, -28, -25, 5), (-14, 14, 78, -70, -117, 71, 40, -9),
         (6, -14, -35, 55, 56, -45, -21, 5), (-1, 7, 6, -15, -10, 10, 4, -1)],
    21: [(1,), (-5, 0, 14, 0, -7, 1), (9, 0, -35, -1, 21, -3), (-5, 1, 21, 1, -14, 2),
         (-6, -5, 27, 9, -22, 3), (13, 10, -59, -26, 52, -7), (-10, -9, 45, 26, -45, 6), (1,),
         (5, 9, -31, -26, 38, -5), (-4, -10, 24, 25, -31, 4), (1, 6, -6, -8, 8, -1)],
}
V_DOT_Y = {
    13: [-0.179421119170724, -0.268597272296381, -0.0432536521449611, 0.203845625239822,
         0.348414935064387, 0.317739022198404, 0.127247211393141],
    17: [-0.0147137185440312, -0.0250197112728618, -0.0131169374224207, 0.00271522134344693,
         0.0177339928490863, 0.02744026786708, 0.0289263790503149, 0.0217471384189736,
         0.0080532004236864],
    21: [0.208277419875994, 0.305356304999981, 0.0311291821584927, -0.259717694500226,
         -0.411902266359988, -0.344173760232181, -0.0926921719855542, 0.208277419875994,
         0.398048476985537, 0.375302942390668, 0.152184571859762],
}

# subset-sum (max, min)
SUBSET_SUM_EXTREMES = {
    13: (0.997246793895754, -0.4912720436120661),
    17: (0.10661619995258814, -0.052850367239313696),
    21: (1.6785763181464288, -1.1084858930779493),
}
