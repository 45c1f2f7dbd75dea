"""Published rate-distortion reference data used by the metric tests.

Each row: (sequence, qp, anchor_bitrate, anchor_psnr, proposed_bitrate,
proposed_psnr, delta_br_percent, delta_psnr_db). The BD table gives the
per-sequence (bd_rate_percent, bd_psnr_db) summary values.
"""

ROWS = [
    ("Silent", 27, 5018.75, 35.232, 4490.90, 39.849, -10.52, 4.618),
    ("Silent", 32, 2605.17, 32.350, 2311.29, 38.297, -11.28, 5.948),
    ("Silent", 37, 1279.90, 29.888, 1110.60, 36.913, -13.23, 7.025),
    ("Silent", 42, 632.48, 27.751, 533.18, 35.543, -15.70, 7.792),
    ("Mother-daughter", 27, 2130.04, 38.551, 1942.74, 40.371, -8.79, 1.820),
    ("Mother-daughter", 32, 1179.45, 35.781, 1076.89, 39.059, -8.70, 3.278),
    ("Mother-daughter", 37, 625.42, 33.238, 561.30, 37.710, -10.25, 4.473),
    ("Mother-daughter", 42, 321.11, 30.872, 281.46, 36.247, -12.35, 5.375),
    ("Fourpeople", 27, 8445.52, 37.441, 7737.71, 39.431, -8.38, 1.990),
    ("Fourpeople", 32, 5240.35, 34.378, 4831.90, 38.321, -7.79, 3.943),
    ("Fourpeople", 37, 3039.62, 31.434, 2787.45, 36.742, -8.30, 5.307),
    ("Fourpeople", 42, 1593.58, 28.477, 1441.66, 35.132, -9.53, 6.656),
    ("Johnny", 27, 4574.14, 38.819, 4052.26, 41.697, -11.41, 2.877),
    ("Johnny", 32, 2721.10, 36.095, 2407.06, 40.675, -11.54, 4.579),
    ("Johnny", 37, 1597.91, 33.561, 1383.51, 39.615, -13.42, 6.054),
    ("Johnny", 42, 939.50, 30.946, 799.05, 38.204, -14.95, 7.258),
    ("KristenAndSara", 27, 5926.84, 38.503, 5328.15, 39.893, -10.10, 1.390),
    ("KristenAndSara", 32, 3686.68, 35.640, 3332.31, 38.652, -9.61, 3.012),
    ("KristenAndSara", 37, 2211.07, 32.824, 1976.24, 37.264, -10.62, 4.439),
    ("KristenAndSara", 42, 1255.51, 29.970, 1101.93, 35.953, -12.23, 5.983),
    ("Vidyo1", 27, 5761.00, 38.425, 5281.38, 40.486, -8.33, 2.060),
    ("Vidyo1", 32, 3525.47, 35.627, 3252.31, 39.197, -7.75, 3.570),
    ("Vidyo1", 37, 2071.47, 32.881, 1905.44, 37.675, -8.02, 4.793),
    ("Vidyo1", 42, 1129.64, 30.066, 1026.00, 35.737, -9.17, 5.671),
    ("Vidyo3", 27, 6222.16, 38.413, 5911.37, 40.266, -4.99, 1.853),
    ("Vidyo3", 32, 3769.25, 35.455, 3610.25, 39.262, -4.22, 3.807),
    ("Vidyo3", 37, 2067.38, 32.459, 1984.91, 37.432, -3.99, 4.974),
    ("Vidyo3", 42, 952.38, 29.493, 907.66, 35.022, -4.70, 5.530),
    ("vidyo4", 27, 5699.43, 38.373, 5252.65, 38.867, -7.84, 0.494),
    ("vidyo4", 32, 3340.29, 35.537, 3077.13, 37.607, -7.88, 2.071),
    ("vidyo4", 37, 1926.97, 32.889, 1757.99, 35.952, -8.77, 3.063),
    ("vidyo4", 42, 1054.13, 30.210, 949.68, 34.470, -9.91, 4.261),
]

BD_TABLE = {
    "Silent": (-90.46, 6.811),
    "Mother-daughter": (-71.21, 4.178),
    "Fourpeople": (-94.95, 5.044),
    "Johnny": (-79.79, 5.739),
    "KristenAndSara": (-60.14, 4.253),
    "Vidyo1": (-65.56, 4.557),
    "Vidyo3": (-65.80, 4.586),
    "vidyo4": (-48.48, 2.897),
}


def sequence_rows(name):
    return [r for r in ROWS if r[0] == name]


def anchor_points(name):
    return [(r[2], r[3], r[1]) for r in sequence_rows(name)]


def proposed_points(name):
    return [(r[4], r[5], r[1]) for r in sequence_rows(name)]
