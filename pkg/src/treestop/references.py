"""Published benchmark values embedded for report deltas.

These constants are transcribed from the published benchmark studies this
package reproduces.  They feed the ``delta vs reference`` column of benchmark
reports and are never used as inputs to any computation.

Citation keys:
  tree        bagged-tree lower bound, published study
  ls          least-squares regression baseline, published study
  neural_net  deep-network lower bound consumed as a reference constant
  single_tree whole-rule decision-tree lower bound consumed as a reference
"""

# American put grid: (sigma, x_M, T, N) -> (v_train, ls_train, v_test, ls_test)
AMERICAN_PUT = {
    (0.2, 85, 1, 50): (15.304, 15.291, 15.285, 15.268),
    (0.2, 90, 1, 50): (11.477, 11.449, 11.482, 11.458),
    (0.2, 100, 1, 50): (6.058, 6.046, 6.068, 6.049),
    (0.2, 110, 1, 50): (2.968, 2.963, 2.979, 2.968),
    (0.4, 85, 1, 50): (20.819, 20.808, 20.849, 20.823),
    (0.4, 90, 1, 50): (18.104, 18.091, 18.129, 18.101),
    (0.4, 100, 1, 50): (13.603, 13.605, 13.618, 13.609),
    (0.4, 110, 1, 50): (10.168, 10.160, 10.172, 10.166),
    (0.2, 85, 1, 100): (15.282, 15.280, 15.301, 15.279),
    (0.2, 90, 1, 100): (11.493, 11.469, 11.476, 11.442),
    (0.2, 100, 1, 100): (6.076, 6.056, 6.081, 6.063),
    (0.2, 110, 1, 100): (2.965, 2.955, 2.994, 2.982),
    (0.2, 85, 2, 50): (15.909, 15.889, 15.918, 15.871),
    (0.2, 90, 2, 50): (12.565, 12.532, 12.573, 12.528),
    (0.2, 100, 2, 50): (7.677, 7.655, 7.685, 7.663),
    (0.2, 110, 2, 50): (4.605, 4.592, 4.615, 4.599),
    (0.4, 85, 2, 50): (24.256, 24.240, 24.283, 24.251),
    (0.4, 90, 2, 50): (21.901, 21.896, 21.943, 21.913),
    (0.4, 100, 2, 50): (17.920, 17.895, 17.949, 17.917),
    (0.4, 110, 2, 50): (14.687, 14.666, 14.692, 14.681),
}

# Symmetric max-call, four-feature mode: (D, x_M) -> (tree, neural_net)
MAXCALL_SYM_4F = {
    (2, 90): (8.019, 8.054), (2, 100): (13.793, 13.874), (2, 110): (21.154, 21.319),
    (3, 90): (11.195, 11.260), (3, 100): (18.522, 18.672), (3, 110): (27.407, 27.550),
    (5, 90): (16.528, 16.605), (5, 100): (26.061, 26.105), (5, 110): (36.693, 26.722),
    (10, 90): (26.196, 26.151), (10, 100): (38.288, 38.201), (10, 110): (50.837, 50.722),
    (20, 90): (37.792, 37.625), (20, 100): (51.670, 51.479), (20, 110): (65.632, 65.412),
    (30, 90): (44.963, 44.723), (30, 100): (59.671, 59.408), (30, 110): (74.417, 74.134),
    (50, 90): (54.109, 53.857), (50, 100): (69.820, 69.550), (50, 110): (85.562, 85.211),
    (100, 90): (66.617, 66.297), (100, 100): (83.699, 83.317), (100, 110): (100.766, 100.323),
    (200, 90): (79.270, 78.906), (200, 100): (97.742, 97.293), (200, 110): (116.201, 115.734),
    (500, 90): (96.247, 95.877), (500, 100): (116.577, 116.146), (500, 110): (136.899, 136.420),
}

# Asymmetric max-call, four-feature mode: (D, x_M) -> (tree, neural_net)
MAXCALL_ASYM_4F = {
    (2, 90): (14.238, 14.300), (2, 100): (19.621, 19.757), (2, 110): (26.908, 27.105),
    (3, 90): (18.819, 19.052), (3, 100): (26.275, 26.642), (3, 110): (35.197, 35.802),
    (5, 90): (27.305, 27.609), (5, 100): (37.572, 37.940), (5, 110): (48.871, 49.415),
    (10, 90): (85.261, 85.785), (10, 100): (103.863, 104.514), (10, 110): (122.792, 123.535),
    (20, 90): (125.618, 125.842), (20, 100): (149.111, 149.477), (20, 110): (172.795, 173.197),
    (30, 90): (154.332, 154.401), (30, 100): (181.175, 181.352), (30, 110): (207.971, 208.219),
    (50, 90): (196.072, 196.093), (50, 100): (227.595, 227.557), (50, 110): (259.080, 258.910),
    (100, 90): (263.572, 263.226), (100, 100): (302.515, 302.020), (100, 110): (341.400, 340.899),
    (200, 90): (344.970, 344.424), (200, 100): (393.009, 392.052), (200, 110): (440.833, 440.115),
    (500, 90): (477.134, 475.730), (500, 100): (539.693, 538.370), (500, 110): (602.314, 600.599),
}

# Knock-out max-call: (D, x_M) -> (tree, single_tree, single_tree_published)
BARRIER_MAXCALL = {
    (4, 90): (34.744, 34.332, 34.300),
    (4, 100): (43.253, 43.216, 43.080),
    (4, 110): (49.462, 49.333, 49.380),
    (8, 90): (45.554, 45.481, 45.400),
    (8, 100): (51.467, 51.313, 51.280),
    (8, 110): (54.521, 54.518, 54.520),
    (16, 90): (51.904, 51.790, 51.850),
    (16, 100): (54.608, 54.610, 54.620),
    (16, 110): (55.965, 55.976, 56.000),
}
