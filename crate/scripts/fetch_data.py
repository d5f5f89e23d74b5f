"""Download the benchmark tables into data/ as plain CSV.

Needs network access plus pandas, xlrd (Concrete) and openpyxl (Energy).
"""
import io
import pathlib
import urllib.request

import pandas as pd

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
OUT = pathlib.Path(__file__).resolve().parent.parent / "data"

CONCRETE = [
    "cement", "blast_furnace_slag", "fly_ash", "water", "superplasticizer",
    "coarse_aggregate", "fine_aggregate", "age", "compressive_strength",
]
ENERGY = [
    "relative_compactness", "surface_area", "wall_area", "roof_area", "overall_height",
    "orientation", "glazing_area", "glazing_area_distribution", "heating_load", "cooling_load",
]
YACHT = [
    "longitudinal_position", "prismatic_coefficient", "length_displacement_ratio",
    "beam_draught_ratio", "length_beam_ratio", "froude_number", "residuary_resistance",
]


def get(url):
    with urllib.request.urlopen(url, timeout=60) as r:
        return r.read()


def main():
    OUT.mkdir(exist_ok=True)
    concrete = pd.read_excel(io.BytesIO(get(f"{UCI}/concrete/compressive/Concrete_Data.xls")))
    concrete.columns = CONCRETE
    concrete.to_csv(OUT / "concrete.csv", index=False)

    energy = pd.read_excel(io.BytesIO(get(f"{UCI}/00242/ENB2012_data.xlsx"))).iloc[:, :10]
    energy.columns = ENERGY
    energy = energy.dropna(how="all").drop(columns="cooling_load")
    energy.to_csv(OUT / "energy_heating.csv", index=False)

    yacht = pd.read_csv(
        io.BytesIO(get(f"{UCI}/00243/yacht_hydrodynamics.data")), sep=r"\s+", header=None, names=YACHT
    )
    yacht.to_csv(OUT / "yacht.csv", index=False)

    for name in ("concrete", "energy_heating", "yacht"):
        print(name, len(pd.read_csv(OUT / f"{name}.csv")), "rows")


if __name__ == "__main__":
    main()
