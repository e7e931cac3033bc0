# scripts/make_decode_instance.py
"""
Write a planted l1-decoding instance for `main.py decode`.

    python scripts/make_decode_instance.py --rows 12 --m 2 --corrupt 2 --out instance.yaml

Rows of A1 are standard normal, v_true is standard normal, and `corrupt`
random rows get an offset of ±(5 + |N(0,1)|).
"""

import os
import sys

import click
import numpy as np
import yaml

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from decode import check_recoverability, stacked_from_rows  # noqa: E402


@click.command()
@click.option("--rows", type=click.IntRange(min=1), default=12, show_default=True)
@click.option("--m", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--corrupt", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def main(rows, m, corrupt, seed, out):
    if corrupt > rows:
        raise click.BadParameter(f"cannot corrupt {corrupt} of {rows} rows", param_hint="--corrupt")
    rng = np.random.default_rng(seed)
    A1 = rng.standard_normal((rows, m))
    v_true = rng.standard_normal(m)
    zbar = A1 @ v_true
    hit = rng.choice(rows, size=corrupt, replace=False)
    zbar[hit] += rng.choice([-1.0, 1.0], size=corrupt) * (5.0 + np.abs(rng.standard_normal(corrupt)))

    sys_ = stacked_from_rows(A1)
    report = check_recoverability(sys_, corrupt, seed=seed)

    with open(out, "w", encoding="utf-8") as handle:
        yaml.safe_dump({
            "A1": A1.tolist(),
            "zbar": zbar.tolist(),
            "v_true": v_true.tolist(),
            "corrupted_rows": sorted(int(i) for i in hit),
        }, handle, sort_keys=False)
    click.echo(f"wrote {out}: rows={rows} m={m} corrupt={corrupt} recoverable={report.holds}")


if __name__ == "__main__":
    main()
