"""Regenerate the frozen thresholds for the reference sweep grid.

    python scripts/calibrate_reference.py [output path]

Each sweep is evaluated at twice its largest degree; the threshold is three
times that value (never below the noise floor). Sweeps whose reference-degree
truncation is numerically singular get a null threshold and an error note.
"""
import sys
from pathlib import Path

from ballop.sweep import calibrate, reference_sweeps, save_calibration

DEFAULT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "calibration.json"


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else DEFAULT
    out.parent.mkdir(parents=True, exist_ok=True)
    calib = calibrate(reference_sweeps())
    save_calibration(calib, out)
    bad = [c["label"] for c in calib["cells"] if c["error"]]
    print(f"wrote {out}: {len(calib['cells'])} cells, {len(bad)} not invertible at reference degree")
    for label in bad:
        print(f"  {label}")


if __name__ == "__main__":
    main(sys.argv)
