"""Run the two bundled instances end to end and print trace checkpoints and histograms.

    python3 scripts/reproduce_tables.py [--out out/] [--shots 8192]
"""
import argparse
from pathlib import Path

from qaco.cli import cmd_classical, cmd_run
from qaco.config import load_config, preset_path


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out")
    ap.add_argument("--shots", type=int)
    args = ap.parse_args()
    for name in ("table1", "table2"):
        cfg = load_config(preset_path(name))
        if args.shots:
            cfg.shots = args.shots
        out = Path(args.out) / name
        print(f"== {name}: weights {cfg.weights}")
        files = cmd_run(cfg, str(out))
        rows = files["histogram"].read_text().splitlines()[1:]
        for line in sorted(rows, key=lambda r: -float(r.split(",")[2]))[:4]:
            print("   ", line)
        cmd_classical(cfg, str(out))


if __name__ == "__main__":
    main()
