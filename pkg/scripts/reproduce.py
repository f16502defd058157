"""Run every figure analogue into OUT/<name>/.

    python scripts/reproduce.py --out results            # everything (many hours on one core)
    python scripts/reproduce.py --only fig7 fig4_half     # a subset
"""
import argparse
import sys
from pathlib import Path

from catqaa.cli import dispatch, parse_config

HERE = Path(__file__).parent / "configs"

JOBS = [
    ("fig7", "compile", "fig7.cfg"),
    ("fig4_half", "scaling", "fig4_half.cfg"),
    ("fig4_one", "scaling", "fig4_one.cfg"),
    ("fig1a", "run", "fig1a.cfg"),
    ("fig1c", "gaps", "fig1c.cfg"),
    ("fig2a", "map", "fig2a.cfg"),
    ("fig2b", "map", "fig2b.cfg"),
    ("fig3", "run", "fig3.cfg"),
    ("fig3c", "gaps", "fig3.cfg"),
]


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", nargs="*")
    args = ap.parse_args(argv)
    for name, command, cfg_file in JOBS:
        if args.only and name not in args.only:
            continue
        cfg = parse_config((HERE / cfg_file).read_text())
        manifest = dispatch(cfg, command, args.out / name)
        print(f"{name}: {len(manifest['files'])} files in {manifest['wall_time']:.0f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
