"""Write the data behind every figure to a directory of CSV files.

    python scripts/make_figures.py --out figures --resolution 200
"""
import argparse
import json
import sys
import tempfile

from lasernoise.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--resolution", type=int)
    args = ap.parse_args()
    code = 0
    for fig in (2, 3, 4, 5, 6, 8):
        argv = ["figure", "--id", str(fig), "--out", args.out]
        if args.resolution:
            with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
                json.dump({"schema_version": 1, "figure": {"id": fig, "resolution": args.resolution}}, fh)
            argv += ["--config", fh.name]
        code = code or main(argv)
    sys.exit(code)
