#!/usr/bin/env python3
"""Writes the small synthetic corpus under samples/data/.

Three venues, publication years 2010-2015 (no CSCW 2015 papers), a handful
of papers per cell and a few dozen RIS citing records per paper. The mix of
in-field and out-of-field citing venues drifts toward in-field over time.
Output is fully determined by the seed.
"""
import csv
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent
OUT = HERE / "data"

IN_FIELD = [
    "Proceedings of the {y} CHI Conference on Human Factors in Computing Systems",
    "Proceedings of the {y} ACM Symposium on User Interface Software and Technology",
    "Proceedings of the ACM on Human-Computer Interaction",
    "International Journal of Human-Computer Studies",
    "ACM Transactions on Computer-Human Interaction",
    "Proceedings of the {y} ACM Designing Interactive Systems Conference",
]
OUT_FIELD = [
    "Nature Communications",
    "IEEE Transactions on Pattern Analysis and Machine Intelligence",
    "Journal of Medical Internet Research",
    "PLOS ONE",
    "Computers in Human Behavior",
    "Sustainability",
]
SOURCE_TAGS = ["T2", "JO", "JF", "BT"]


def doi_filename(doi):
    ok = set("abcdefghijklmnopqrstuvwxyz0123456789._-")
    return "".join(c if c in ok else "%{:02X}".format(ord(c)) for c in doi)


def main():
    rng = random.Random(20230101)
    (OUT / "ris").mkdir(parents=True, exist_ok=True)
    rows = []
    serial = 0
    for venue, registrant in [("CHI", "10.1145"), ("UIST", "10.1145"), ("CSCW", "10.1145")]:
        for year in range(2010, 2016):
            if venue == "CSCW" and year == 2015:
                continue
            p_out = 0.75 - 0.05 * (year - 2010)
            for _ in range(3):
                serial += 1
                doi = f"{registrant}/sample.{venue.lower()}.{year}.{serial:04d}"
                rows.append((venue, year, doi))
                lines = []
                for k in range(rng.randint(8, 20)):
                    cy = rng.randint(year, 2022)
                    if rng.random() < p_out:
                        src = rng.choice(OUT_FIELD)
                    else:
                        src = rng.choice(IN_FIELD).format(y=cy)
                    lines += [
                        "TY  - JOUR",
                        f"TI  - Citing work {serial}-{k}",
                        f"{rng.choice(SOURCE_TAGS)}  - {src}",
                        f"PY  - {cy}///" if rng.random() > 0.03 else "PY  - n.d.",
                        f"DO  - 10.5555/cite.{serial}.{k}",
                        "ER  - ",
                        "",
                    ]
                (OUT / "ris" / (doi_filename(doi) + ".ris")).write_text("\n".join(lines), encoding="utf-8")
    with open(OUT / "manifest.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["venue", "year", "doi"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
