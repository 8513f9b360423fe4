"""Relative three-fold rates across the bundled configurations.

Only ratios are meaningful here: absolute rates depend on detector and
coupling efficiencies the model does not know about.
"""
from spdc_purity.presets import preset
from spdc_purity.rate_model import estimate_rates, relative_threefold_rate

NAMES = ("fig3b", "fig3c", "fig3d")


def main():
    print(f"{'config':8} {'herald BW':>10} {'T_idler':>8} {'T_wcp':>7} {'three-fold':>11}")
    for name in NAMES:
        r = estimate_rates(preset(name))
        print(f"{name:8} {r.herald_bandwidth:10.3f} {r.idler_transmission:8.4f} "
              f"{r.wcp_transmission:7.4f} {r.threefold:11.4g}")
    ref = preset("fig3b")
    for name in ("fig3c", "fig3d"):
        ratio = relative_threefold_rate(ref, preset(name)).ratio
        print(f"fig3b : {name} = {ratio:.3g}")


if __name__ == "__main__":
    main()
