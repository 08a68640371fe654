#!/usr/bin/env python3
"""Regenerates the bundled Jerlov water-type IOP tables in data/jerlov/.

Each table gives spectral absorption a(lambda) and scattering b(lambda) in 1/m
on a 400-700 nm grid at 10 nm steps, built from a standard bio-optical model:

    a(lambda) = a_w(lambda) + 0.06 * Chl^0.65 * A_chl(lambda)
                + a_g440 * exp(-0.014 * (lambda - 440))
    b(lambda) = b_w(lambda) + b_p550

  a_w      pure-water absorption (Pope & Fry 1997)
  A_chl    normalized chlorophyll-specific absorption (Prieur & Sathyendranath 1981)
  a_g440   CDOM absorption at 440 nm, exponential slope 0.014 1/nm
  b_w      pure-water scattering, 0.00193 * (550/lambda)^4.32 (Morel 1974)
  b_p550   particle scattering, treated as spectrally flat

Per-type parameters (Chl mg/m^3, a_g440 1/m, b_p550 1/m) are chosen so the
resulting wideband coefficients follow the Jerlov classification ordering
(oceanic I..III clear to moderately turbid, coastal 1C..9C increasingly
turbid), matching published Jerlov/Solonenko-Mobley tabulations in shape.
"""

import os

GRID = list(range(400, 701, 10))

# Pope & Fry (1997) pure-water absorption, 1/m
A_W = [0.00663, 0.00473, 0.00454, 0.00495, 0.00635, 0.00922, 0.00979, 0.01060,
       0.01270, 0.01500, 0.02040, 0.03250, 0.04090, 0.04340, 0.04740, 0.05650,
       0.06190, 0.06950, 0.08960, 0.13510, 0.22240, 0.26440, 0.27550, 0.29160,
       0.31080, 0.34000, 0.41000, 0.43900, 0.46500, 0.51600, 0.62400]

# Prieur & Sathyendranath (1981) normalized chlorophyll absorption spectrum
A_CHL = [0.687, 0.828, 0.913, 0.973, 1.000, 0.944, 0.917, 0.870, 0.798, 0.750,
         0.668, 0.618, 0.528, 0.474, 0.416, 0.357, 0.294, 0.276, 0.291, 0.282,
         0.236, 0.252, 0.276, 0.317, 0.334, 0.356, 0.441, 0.595, 0.502, 0.329,
         0.215]

# water_type_id -> (Chl, a_g440, b_p550)
TYPES = {
    "JI":   (0.03, 0.005, 0.03),
    "JIA":  (0.10, 0.010, 0.06),
    "JIB":  (0.30, 0.020, 0.10),
    "JII":  (1.00, 0.050, 0.20),
    "JIII": (2.00, 0.080, 0.40),
    "J1C":  (1.00, 0.060, 0.35),
    "J3C":  (2.00, 0.100, 0.65),
    "J5C":  (3.50, 0.130, 1.00),
    "J7C":  (5.00, 0.160, 1.40),
    "J9C":  (7.00, 0.180, 1.90),
}

HEADER = """# Jerlov water type {tid}: spectral inherent optical properties
# Columns: wavelength_nm  absorption_1_per_m  scattering_1_per_m
# Bio-optical construction (see tools/make_jerlov_tables.py):
#   a = a_w(Pope&Fry 1997) + 0.06*Chl^0.65*A_chl(Prieur&Sathyendranath 1981)
#       + a_g440*exp(-0.014*(lambda-440))
#   b = 0.00193*(550/lambda)^4.32 (Morel 1974) + b_p550 (flat particle term)
# Parameters: Chl={chl} mg/m^3, a_g440={ag} 1/m, b_p550={bp} 1/m
"""


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data", "jerlov")
    os.makedirs(out_dir, exist_ok=True)
    for tid, (chl, ag, bp) in TYPES.items():
        rows = []
        for i, lam in enumerate(GRID):
            a = A_W[i] + 0.06 * chl ** 0.65 * A_CHL[i] + ag * pow(2.718281828459045, -0.014 * (lam - 440))
            b = 0.00193 * (550.0 / lam) ** 4.32 + bp
            rows.append((lam, a, b))
        path = os.path.join(out_dir, f"{tid}.txt")
        with open(path, "w") as f:
            f.write(HEADER.format(tid=tid, chl=chl, ag=ag, bp=bp))
            for lam, a, b in rows:
                f.write(f"{lam} {a:.6f} {b:.6f}\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
