"""Command-line front end: ``tworelay {simulate,bounds,spf,gain,plot}``.

Configs are INI files::

    [code]
    name = hamming-15-11        ; comma list allowed for bounds
    decoder = bm

    [channel]
    ebn0_db = 4:1:8             ; start:step:stop or comma list
    h = 1.0                     ; same syntax, swept as an outer loop
    h1 = 1.0
    h2 = 1.0
    er_ratio = 1.0

    [simulate]
    protocols = tw_sdf, tw_1bsf, tw_1bsf_rel
    target_errors = 200
    max_trials = 100000000
    seed = 0

    [bounds]
    variants = original, redesigned
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .bounds import QuadratureSpec, bound_report, perfect_gain, gain_ratio, reports_csv
from .channel import NetworkParams
from .codes import (
    DECODERS,
    EnumerationTooLarge,
    compute_spf,
    compute_weight_distribution,
    make_code,
    perfect_spf,
    spf_csv,
)
from .montecarlo import CSV_HEADER, SweepConfig, run_sweep, sweep_csv
from .protocols import PROTOCOLS

PRESETS = ("fig4", "fig5", "fig6", "fig8a", "fig8b", "table1")


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------
# config parsing

_SCHEMA = {
    "code": {"name": str, "decoder": str, "w_max": int},
    "channel": {"ebn0_db": "grid", "h": "grid", "h1": float, "h2": float, "er_ratio": float},
    "simulate": {
        "protocols": "list", "trials": int, "target_errors": int, "max_trials": int, "seed": int,
        "block_size": int, "sampler": str, "crc_checks": bool, "genie_case_ii": bool,
        "random_messages": bool,
    },
    "bounds": {"variants": "list", "quad_tol": float, "quad_width": float, "epsilon": float},
    "spf": {"codes": "list", "decoder": str},
    "gain": {"codes": "list"},
    "output": {"name": str},
}


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3:
            raise ValueError("range must be start:step:stop")
        start, step, stop = parts
        if step <= 0:
            raise ValueError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ValueError("empty range")
        return tuple(round(start + i * step, 10) for i in range(count))
    values = tuple(float(x) for x in text.split(",") if x.strip())
    if not values:
        raise ValueError("empty list")
    return values


def _parse_value(kind, raw: str):
    if kind == "grid":
        return parse_grid(raw)
    if kind == "list":
        items = tuple(x.strip() for x in raw.split(",") if x.strip())
        if not items:
            raise ValueError("empty list")
        return items
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    return kind(raw.strip())


@dataclass
class RunConfig:
    values: dict[str, dict[str, object]] = field(default_factory=dict)
    source: str = "<defaults>"

    def get(self, section: str, key: str, default=None):
        return self.values.get(section, {}).get(key, default)

    def resolved(self) -> dict:
        return {s: {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()} for s, d in sorted(self.values.items())}


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        body = line.strip()
        if body.startswith("[") and "]" in body:
            current = body[1 : body.index("]")].strip()
        elif current == section and body.split("=")[0].split(":")[0].strip().lower() == key:
            return i
    return None


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {' '.join(str(exc).split())}") from exc
    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            kind = _SCHEMA[section].get(key)
            line = _line_of(text, section, key)
            where = f"{source}:{line}" if line else source
            if kind is None:
                raise ConfigError(f"{where}: unknown key '{key}' in [{section}]")
            try:
                values[section][key] = _parse_value(kind, raw)
            except ValueError as exc:
                raise ConfigError(f"{where}: invalid value for [{section}] {key} = {raw!r}: {exc}") from exc
    return RunConfig(values, source)


def load_config(path: str | None, preset: str | None) -> RunConfig:
    if path and preset:
        raise ConfigError("use either --config or --preset, not both")
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        text = resources.files("tworelay.presets").joinpath(f"{preset}.ini").read_text()
        return parse_config(text, f"preset:{preset}")
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        return parse_config(text, path)
    return RunConfig()


def _codes(cfg: RunConfig) -> list[str]:
    name = cfg.get("code", "name")
    if name is None:
        raise ConfigError("missing key 'name' in [code]")
    return [x.strip() for x in str(name).split(",") if x.strip()]


def _manifest_digest(sub: str, cfg: RunConfig, seed: int | None, output: str = "") -> str:
    """Digest of the run manifest: subcommand, resolved config, output name, version and seed."""
    blob = json.dumps({"sub": sub, "config": cfg.resolved(), "output": output, "version": __version__, "seed": seed},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _stamp(text: str, digest: str) -> str:
    return f"# tool=tworelay {__version__}\n# manifest={digest}\n" + text


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _stem(cfg: RunConfig) -> str:
    return str(cfg.get("output", "name", "run"))


def sweep_config(cfg: RunConfig, code: str, seed_override: int | None = None) -> SweepConfig:
    kw = dict(
        code=code,
        decoder=cfg.get("code", "decoder", "bm"),
        ebn0_db=cfg.get("channel", "ebn0_db", (4.0, 5.0, 6.0, 7.0, 8.0)),
        h=cfg.get("channel", "h", (1.0,)),
        h1=cfg.get("channel", "h1", 1.0),
        h2=cfg.get("channel", "h2", 1.0),
        er_ratio=cfg.get("channel", "er_ratio", 1.0),
        protocols=cfg.get("simulate", "protocols", PROTOCOLS),
        trials=cfg.get("simulate", "trials"),
        target_errors=cfg.get("simulate", "target_errors", 200),
        max_trials=cfg.get("simulate", "max_trials", 10**8),
        seed=seed_override if seed_override is not None else cfg.get("simulate", "seed", 0),
        block_size=cfg.get("simulate", "block_size", 4096),
        sampler=cfg.get("simulate", "sampler", "conditional"),
        crc_checks=cfg.get("simulate", "crc_checks", True),
        genie_case_ii=cfg.get("simulate", "genie_case_ii", True),
        random_messages=cfg.get("simulate", "random_messages", True),
    )
    if kw["decoder"] not in DECODERS:
        raise ConfigError(f"invalid value for [code] decoder: {kw['decoder']!r} (choose {', '.join(DECODERS)})")
    try:
        return SweepConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ----------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: RunConfig, out: Path, seed: int | None, workers: int) -> list[Path]:
    paths = []
    for code in _codes(cfg):
        sc = sweep_config(cfg, code, seed)
        rows = run_sweep(sc, workers)
        fname = f"{_stem(cfg)}_simulate_{code}.csv"
        digest = _manifest_digest("simulate", cfg, sc.seed, fname)
        text = sweep_csv(sc, rows, {"manifest": digest, "config_source": cfg.source})
        paths.append(_write(out, fname, text))
    return paths


def _spf_for(code, decoder: str):
    if code.is_perfect:
        return perfect_spf(code)
    return compute_spf(code, decoder)


def cmd_bounds(cfg: RunConfig, out: Path) -> list[Path]:
    paths = []
    decoder = cfg.get("code", "decoder", "bm")
    variants = cfg.get("bounds", "variants", ("original", "redesigned"))
    quad = QuadratureSpec(cfg.get("bounds", "quad_tol", 1e-12), cfg.get("bounds", "quad_width", 10.0))
    epsilon = cfg.get("bounds", "epsilon", 1.0)
    for name in _codes(cfg):
        code = make_code(name)
        spf = _spf_for(code, decoder)
        w_max = cfg.get("code", "w_max")
        if w_max is None and code.is_perfect:
            # full distribution is cheap here and lets the link bounds collapse
            w_max = code.n
        wd = compute_weight_distribution(code, w_max)
        reports = []
        for h in cfg.get("channel", "h", (1.0,)):
            for db in cfg.get("channel", "ebn0_db", (4.0, 5.0, 6.0, 7.0, 8.0)):
                params = NetworkParams.from_ebn0(db, code.rate, h=h, h1=cfg.get("channel", "h1", 1.0),
                                                 h2=cfg.get("channel", "h2", 1.0),
                                                 er_ratio=cfg.get("channel", "er_ratio", 1.0))
                for variant in variants:
                    if variant not in ("original", "redesigned"):
                        raise ConfigError(f"invalid value for [bounds] variants: {variant!r}")
                    reports.append(bound_report(params, code, spf, wd, variant, db, quad, epsilon))
        fname = f"{_stem(cfg)}_bounds_{name}.csv"
        meta = {"tool": f"tworelay {__version__}", "manifest": _manifest_digest("bounds", cfg, None, fname),
                "code": code.name}
        paths.append(_write(out, fname, reports_csv(reports, meta)))
    return paths


def cmd_spf(codes: list[str], decoder: str, out: Path) -> list[Path]:
    if decoder not in DECODERS:
        raise ConfigError(f"unknown decoder {decoder!r} (choose {', '.join(DECODERS)})")
    paths = []
    for name in codes:
        code = make_code(name)
        spf = compute_spf(code, decoder)
        fname = f"spf_{code.name}_{decoder}.csv"
        digest = _manifest_digest("spf", RunConfig({"spf": {"codes": (name,), "decoder": decoder}}), None, fname)
        paths.append(_write(out, fname, _stamp(spf_csv(code, spf), digest)))
    return paths


def gain_table(codes: list[str], decoder: str = "bm") -> list[dict[str, object]]:
    rows = []
    for name in codes:
        code = make_code(name)
        if code.is_perfect:
            g, how = perfect_gain(code), "closed-form"
        else:
            g, how = gain_ratio(code, compute_spf(code, decoder)), f"spf-{decoder}"
        rows.append({"code": code.name, "n": code.n, "t": code.t, "gain": g, "method": how})
    return rows


def _fmt_gain(g) -> str:
    return str(g.numerator) if g.denominator == 1 else repr(float(g))


def cmd_gain(codes: list[str], decoder: str, out: Path | None) -> str:
    rows = gain_table(codes, decoder)
    lines = ["code,n,t,gain,method"] + [f"{r['code']},{r['n']},{r['t']},{_fmt_gain(r['gain'])},{r['method']}" for r in rows]
    text = "\n".join(lines) + "\n"
    if out is not None:
        digest = _manifest_digest("gain", RunConfig({"gain": {"codes": tuple(codes)}}), None, "gain.csv")
        _write(out, "gain.csv", _stamp(text, digest))
    return text


_PLOT_TEMPLATE = '''"""Generated by tworelay {version} (manifest {digest}); run with python to draw the figure."""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

SIM = {sim!r}
BOUND = {bound!r}
XLABEL = {xlabel!r}

fig, ax = plt.subplots(figsize=(6, 4.5))
for label, (x, y) in SIM.items():
    ax.semilogy(x, y, "o-", label=label + " sim")
for label, (x, y) in BOUND.items():
    ax.semilogy(x, y, "--", label=label + " up")
ax.set_xlabel(XLABEL)
ax.set_ylabel("BLER")
ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
'''


def _read_rows(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    lines = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise ConfigError(f"{path}: no data rows")
    reader = csv.DictReader(lines)
    return reader.fieldnames or [], list(reader)


def cmd_plot(csv_paths: list[str], out: Path, name: str = "plot") -> Path:
    sims, bounds = {}, {}
    x_keys = set()
    for p in csv_paths:
        header, rows = _read_rows(Path(p))
        if header == CSV_HEADER:
            kind = "sim"
        elif "sdf_upper" in header and "sf_upper" in header:
            kind = "bound"
        else:
            raise ConfigError(f"{p}: unrecognised CSV schema")
        hs = {r["h"] for r in rows}
        dbs = {r["eb_n0_db"] for r in rows}
        xk = "h" if len(hs) > 1 and len(dbs) == 1 else "eb_n0_db"
        x_keys.add(xk)
        for r in rows:
            x = float(r[xk])
            if kind == "sim":
                label = f"{r['code']} {r['protocol']}"
                if xk == "eb_n0_db" and len(hs) > 1:
                    label += f" h={r['h']}"
                sims.setdefault(label, ([], []))
                sims[label][0].append(x)
                sims[label][1].append(float(r["bler"]))
            else:
                curves = [(f"{r['code']} tw_1bsf" + ("_rel" if r["variant"] == "redesigned" else ""), "sf_upper")]
                if r["variant"] == "original":
                    curves.append((f"{r['code']} tw_sdf", "sdf_upper"))
                for label, col in curves:
                    if xk == "eb_n0_db" and len(hs) > 1:
                        label += f" h={r['h']}"
                    bounds.setdefault(label, ([], []))
                    bounds[label][0].append(x)
                    bounds[label][1].append(float(r[col]))
    if len(x_keys) > 1:
        raise ConfigError("CSV files disagree on the x axis (Eb/N0 versus h)")
    xlabel = "h" if x_keys == {"h"} else "Eb/N0 (dB)"
    digest = hashlib.sha256(json.dumps([sims, bounds, name]).encode()).hexdigest()[:16]
    script = _PLOT_TEMPLATE.format(version=__version__, digest=digest, sim=sims, bound=bounds, xlabel=xlabel,
                                   png=f"{name}.png")
    return _write(out, f"{name}.py", script)


# ----------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tworelay", description="Two-way relay BLER simulator and bound engine.")
    ap.add_argument("--version", action="version", version=f"tworelay {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", metavar="PATH")
            p.add_argument("--preset", metavar="NAME", choices=PRESETS)
        p.add_argument("--out", metavar="DIR", default=".")

    p = sub.add_parser("simulate", help="Monte-Carlo BLER sweep")
    common(p)
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--workers", type=int, default=1, metavar="N")

    p = sub.add_parser("bounds", help="analytical bounds over the configured grid")
    common(p)

    p = sub.add_parser("spf", help="sphere partitioning function table")
    common(p)
    p.add_argument("code", nargs="?")
    p.add_argument("decoder", nargs="?")

    p = sub.add_parser("gain", help="asymptotic TW-1bSF gain over TW-SDF")
    common(p)
    p.add_argument("codes", nargs="*")
    p.add_argument("--decoder", default="bm")

    p = sub.add_parser("plot", help="emit a matplotlib script from CSV outputs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", metavar="DIR", default=".")
    p.add_argument("--name", default="plot")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "simulate":
            cfg = load_config(args.config, args.preset)
            if args.workers < 1:
                raise ConfigError("--workers must be at least 1")
            paths = cmd_simulate(cfg, out, args.seed, args.workers)
        elif args.command == "bounds":
            paths = cmd_bounds(load_config(args.config, args.preset), out)
        elif args.command == "spf":
            cfg = load_config(args.config, args.preset)
            codes = [args.code] if args.code else list(cfg.get("spf", "codes", ()))
            if not codes:
                raise ConfigError("no code given")
            decoder = args.decoder or cfg.get("spf", "decoder", "bm")
            paths = cmd_spf(codes, decoder, out)
        elif args.command == "gain":
            cfg = load_config(args.config, args.preset)
            codes = args.codes or list(cfg.get("gain", "codes", ()))
            if not codes:
                raise ConfigError("no code given")
            sys.stdout.write(cmd_gain(codes, args.decoder, out))
            paths = [out / "gain.csv"]
        else:
            paths = [cmd_plot(args.csv, out, args.name)]
    except (ConfigError, EnumerationTooLarge, ValueError, ArithmeticError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"tworelay {args.command}: error: {msg}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
