"""Canned figure scenarios and the plotting scripts written next to their data."""

from __future__ import annotations

import hashlib
import json
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .config import ScenarioConfig, parse_config
from .pipeline import RunManifest, run_scenario

_HEAD = '''"""Plot {fid}: {title}. Needs matplotlib; run from this directory."""
import csv
import matplotlib.pyplot as plt


def read(name):
    with open(name) as fh:
        return list(csv.DictReader(fh))


def col(rows, key, cast=float):
    return [cast(r[key]) for r in rows]


'''

_BANDS = '''hhg = read("hhg_bands.csv")
avg = read("qshhg_bands_theta_avg.csv")
odd = [r for r in hhg if int(r["N"]) % 2 == 1]
even = [r for r in avg if int(r["N"]) % 2 == 0]
plt.semilogy(col(odd, "N"), col(odd, "n_photons"), "bo", label="HHG")
plt.semilogy(col(even, "N"), col(even, "n_photons"), "rs", label="QSHHG (theta average)")
plt.xlabel("harmonic order N")
plt.ylabel("photons per mode")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
'''

_SCRIPTS = {
    "density": '''rows = read("spectrum_density.csv")
plt.semilogy(col(rows, "order"), col(rows, "hhg_dn_domega"), "b-", label="HHG")
plt.semilogy(col(rows, "order"), col(rows, "qshhg_dn_domega_theta_avg"), "r-", label="QSHHG")
plt.xlabel("harmonic order N")
plt.ylabel("dn/domega (s)")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "bands": _BANDS,
    "theta": '''rows = read("qshhg_theta_values.csv")
for th, mk in zip(sorted({{r["theta"] for r in rows}}, key=float), "o^><"):
    sel = [r for r in rows if r["theta"] == th and int(r["N"]) % 2 == 0]
    plt.semilogy(col(sel, "N"), col(sel, "n_photons"), mk, label="theta = %.3f" % float(th))
plt.xlabel("harmonic order N")
plt.ylabel("photons per mode")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "joint": '''import math
rows = read("joint.csv")
m_max = max(col(rows, "m", int)) + 1
n_max = max(col(rows, "n", int)) + 1
grid = [[float("nan")] * n_max for _ in range(m_max)]
for r in rows:
    p = float(r["probability"])
    grid[int(r["m"])][int(r["n"])] = math.log10(p) if p > 0 else float("nan")
plt.imshow(grid, origin="lower", aspect="auto")
plt.xlabel("n (squeezed-vacuum photons)")
plt.ylabel("m (sideband photons)")
plt.colorbar(label="log10 P(m, n)")
plt.savefig("{fid}.png", dpi=150)
''',
    "marginal": '''rows = read("marginal.csv")
for N in sorted({{r["N"] for r in rows}}, key=int):
    sel = [r for r in rows if r["N"] == N]
    plt.semilogy(col(sel, "m"), col(sel, "p_analytic"), label="N = %s analytic" % N)
    exact = [r for r in sel if r["p_exact"]]
    if exact:
        plt.semilogy(col(exact, "m"), col(exact, "p_exact"), ".", label="N = %s exact" % N)
plt.xlabel("m")
plt.ylabel("P(m)")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "projq": '''rows = [r for r in read("projq.csv") if int(r["l"]) > 0]
for src, style in (("analytic-projq", "o"), ("numeric", "-")):
    sel = [r for r in rows if r["source"] == src]
    for key in {keys}:
        plt.loglog(col(sel, "l"), col(sel, key), style, label="%s %s" % (key, src))
plt.xlabel("l")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "fringe": '''rows = read("fringe.csv")
for parity, style in (("all", "b-"), ("even-only", "r--")):
    sel = [r for r in rows if r["parity"] == parity]
    plt.plot(col(sel, "delta_l"), col(sel, "ratio"), style, label=parity)
plt.xlabel("photon-number resolution delta l")
plt.ylabel("modulation / modulation at delta l = 0")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "projN": '''rows = read("projN.csv")
for th in sorted({{r["theta"] for r in rows}}, key=float):
    for src, style in (("analytic-projN", "-"), ("numeric", "o")):
        sel = [r for r in rows if r["theta"] == th and r["source"] == src]
        for key in {keys}:
            if sel:
                plt.semilogy(col(sel, "m"), col(sel, key), style, label="%s %s theta=%.3f" % (key, src, float(th)))
plt.xlabel("m")
plt.legend(fontsize=6)
plt.savefig("{fid}.png", dpi=150)
''',
    "projN_avg": '''rows = [r for r in read("projN.csv") if r["source"] == "analytic-projN"]
ms = sorted({{int(r["m"]) for r in rows}})
for key in ("dx1_sq", "dx2_sq"):
    avg = [sum(float(r[key]) for r in rows if int(r["m"]) == m) / sum(1 for r in rows if int(r["m"]) == m) for m in ms]
    plt.semilogy(ms, avg, label=key + " theta average")
plt.xlabel("m")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "projN_zeta": '''rows = [r for r in read("projN.csv") if r["source"] == "analytic-projN"]
for r_sq in sorted({{r["r"] for r in rows}}, key=float):
    sel = [r for r in rows if r["r"] == r_sq]
    plt.loglog(col(sel, "zeta_sq"), col(sel, "dx1_sq"), label="r = %s" % r_sq)
plt.xlabel("|zeta_N|^2")
plt.ylabel("Delta X1^2 (m = 50)")
plt.legend()
plt.savefig("{fid}.png", dpi=150)
''',
    "wigner": '''rows = read("wigner.csv")
states = list(dict.fromkeys(r["state"] for r in rows))
fig, axes = plt.subplots(1, len(states), figsize=(4 * len(states), 4), squeeze=False)
for ax, st in zip(axes[0], states):
    sel = [r for r in rows if r["state"] == st]
    xs = sorted({{float(r["x"]) for r in sel}})
    ps = sorted({{float(r["p"]) for r in sel}})
    W = [[0.0] * len(xs) for _ in ps]
    xi = {{x: i for i, x in enumerate(xs)}}
    pi = {{p: i for i, p in enumerate(ps)}}
    for r in sel:
        W[pi[float(r["p"])]][xi[float(r["x"])]] = float(r["W"])
    ax.imshow(W, origin="lower", extent=(xs[0], xs[-1], ps[0], ps[-1]), aspect="auto", cmap="RdBu_r")
    ax.set_title(st)
    ax.set_xlabel("X1")
    ax.set_ylabel("X2")
fig.savefig("{fid}.png", dpi=150)
''',
}

FIGURES = {
    "fig1a": ("ZnO differential photon spectrum, theta averaged", "density", {}),
    "fig1b": ("ZnO photons per harmonic mode, theta averaged", "bands", {}),
    "fig1c": ("ZnO sideband photons at four squeezing phases", "theta", {}),
    "fig1d": ("hydrogen photons per harmonic mode, theta averaged", "bands", {}),
    "fig2": ("joint sideband / squeezed-vacuum photon distribution", "joint", {}),
    "fig3": ("sideband photon distributions for N = 8..14", "marginal", {}),
    "fig4a": ("cat-state quadrature variances versus l, theta = 0", "projq", {"keys": ("dx1_sq", "dx2_sq")}),
    "fig4b": ("cat-state g2 versus l", "projq", {"keys": ("g2",)}),
    "fig4c": ("cat-state quadrature variances versus l, theta = pi/2", "projq", {"keys": ("dx1_sq", "dx2_sq")}),
    "fig4d": ("fringe modulation versus photon-number resolution", "fringe", {}),
    "fig5a": ("photon-added squeezed vacuum g2 versus m", "projN", {"keys": ("g2",)}),
    "fig5b": ("photon-added squeezed vacuum quadratures, theta = 0, pi/2", "projN", {"keys": ("dx1_sq", "dx2_sq")}),
    "fig5c": ("photon-added squeezed vacuum quadratures, theta averaged", "projN_avg", {}),
    "fig5d": ("squeezed quadrature versus sideband coupling for m = 50", "projN_zeta", {}),
    "s1": ("sideband photon distribution, exact against closed form (r = 10)", "marginal", {}),
    "s2": ("projection on the squeezed mode, numeric against analytic", "projq",
           {"keys": ("g2", "dx1_sq", "dx2_sq")}),
    "s3": ("resolution-averaged cat Wigner functions", "wigner", {}),
    "s4": ("projection on the sideband mode, numeric against analytic", "projN",
           {"keys": ("g2", "dx1_sq", "dx2_sq")}),
    "s5": ("Wigner functions of photon-added squeezed vacua", "wigner", {}),
}


class UnknownFigure(ValueError):
    def __init__(self, fid):
        super().__init__(f"unknown figure {fid!r}; valid ids: {', '.join(FIGURES)}")


def figure_config(fid: str) -> ScenarioConfig:
    if fid not in FIGURES:
        raise UnknownFigure(fid)
    text = resources.files("qshhg.runner").joinpath("configs", f"{fid}.cfg").read_text()
    return parse_config(text)


def plot_script(fid: str) -> str:
    title, kind, extra = FIGURES[fid]
    body = _SCRIPTS[kind].format(fid=fid, keys=repr(extra.get("keys", ())))
    return _HEAD.format(fid=fid, title=title) + body


def reproduce_figure(fid: str, out_dir, threads: int = 1, allow_expensive: bool = False) -> RunManifest:
    """Run the canned scenario for ``fid`` and write its data, manifest and plot_<fid>.py into out_dir."""
    cfg = figure_config(fid)
    if allow_expensive:
        cfg = replace(cfg, allow_expensive=True)
    manifest = run_scenario(cfg, out_dir, threads)
    path = Path(out_dir) / f"plot_{fid}.py"
    path.write_text(plot_script(fid))
    data = path.read_bytes()
    manifest.outputs.append({"file": path.name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    manifest.notes.append(f"figure {fid}: {FIGURES[fid][0]}")
    (Path(out_dir) / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return manifest
