"""Command-line front end.

Subcommands: gen (synthetic dataset), fit (train), eval (metrics), dist
(pairwise distance matrix), mds (classical scaling of a distance matrix),
fisher (separability tables and weights).

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical degeneracy.
Every run writes a `run_config.txt` echo sufficient to reproduce it; floats
in CSV output carry 17 significant digits so they round-trip losslessly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataio, pipeline
from .errors import DegeneracyError, DimensionError, FormatError
from .fisher import NModeFisher
from .manifold import WeightVector
from .pipeline import EvalMetrics, PipelineConfig

MDS_SYMMETRY_TOL = 1e-9
_FLOAT_FMT = ".17g"


@dataclass
class ReportBundle:
    """Evaluation outputs gathered for writing: metrics, separability table,
    weights, and optional distance matrix / embedding coordinates."""

    metrics: EvalMetrics | None = None
    fisher: NModeFisher | None = None
    weights: WeightVector | None = None
    distances: np.ndarray | None = None
    coordinates: np.ndarray | None = None

    def __post_init__(self):
        if (
            self.coordinates is not None
            and self.distances is not None
            and self.coordinates.shape[0] != self.distances.shape[0]
        ):
            raise DimensionError(
                "coordinate count does not match the sample count"
            )


def classical_mds(distances: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Classical (Torgerson) scaling of a symmetric zero-diagonal distance
    matrix into k coordinates.

    Double-centers the squared distances, takes the top-k eigenpairs, clips
    negative eigenvalues to zero, and fixes each coordinate axis sign so the
    first non-negligible loading is positive. Returns the coordinates and the
    full eigenvalue spectrum (descending); negative trailing eigenvalues
    measure how far the input is from exactly Euclidean.
    """
    d = np.asarray(distances, dtype=np.float64)
    if k < 1:
        raise DimensionError(f"k must be >= 1, got {k}")
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionError(f"distance matrix must be square, got {d.shape}")
    if np.max(np.abs(d - d.T), initial=0.0) > MDS_SYMMETRY_TOL:
        raise DimensionError("distance matrix is not symmetric")
    if np.max(np.abs(np.diag(d)), initial=0.0) > 1e-12:
        raise DimensionError("distance matrix has a non-zero diagonal")
    n = d.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d * d) @ j
    b = (b + b.T) / 2.0
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    evecs = evecs[:, order]
    kk = min(k, n)
    coords = evecs[:, :kk] * np.sqrt(np.clip(evals[:kk], 0.0, None))
    if kk < k:
        coords = np.hstack([coords, np.zeros((n, k - kk))])
    for col in range(coords.shape[1]):
        nz = np.flatnonzero(np.abs(coords[:, col]) > 1e-12)
        if nz.size and coords[nz[0], col] < 0:
            coords[:, col] = -coords[:, col]
    return coords, evals


# ---------------------------------------------------------------------------
# output helpers


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, _FLOAT_FMT)
    return str(x)


def _write_csv(path: Path, header: list[str] | None, rows) -> None:
    lines = []
    if header is not None:
        lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    _write_text(path, "\n".join(lines) + "\n")


def _echo_config(outdir: Path, command: str, settings: dict) -> None:
    lines = [f"command={command}"]
    for key in sorted(settings):
        lines.append(f"{key}={_fmt(settings[key])}")
    _write_text(outdir / "run_config.txt", "\n".join(lines) + "\n")


def _write_summary(outdir: Path, payload: dict) -> None:
    _write_text(outdir / "summary.json", json.dumps(payload, indent=2) + "\n")


def _fisher_rows(nf: NModeFisher):
    for r in nf.per_mode:
        yield [str(r.mode), _fmt(r.between), _fmt(r.within), _fmt(r.score), r.flag or "-"]
    yield ["nmode", _fmt(nf.between_n), _fmt(nf.within_n), _fmt(nf.score_n), nf.flag or "-"]


def _write_fisher_tables(outdir: Path, model) -> None:
    rows = []
    for r in _fisher_rows(model.fisher_raw):
        rows.append(["raw"] + r)
    for r in _fisher_rows(model.fisher):
        rows.append(["final"] + r)
    _write_csv(
        outdir / "fisher.csv",
        ["stage", "mode", "between", "within", "score", "flag"],
        rows,
    )
    _write_csv(
        outdir / "weights.csv",
        ["mode", "weight"],
        (
            [str(m), _fmt(float(w))]
            for m, w in zip(model.modes, model.weights.weights)
        ),
    )
    _write_csv(
        outdir / "angles.csv",
        ["mode", "mean_class_angle_raw", "mean_class_angle_projected"],
        (
            [str(m), _fmt(a), "-" if b is None else _fmt(b)]
            for m, (a, b) in zip(model.modes, model.angle_diag)
        ),
    )


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _parse_modes(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _parse_dims(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.lower().split("x"))


def _load_config_file(path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


_CONFIG_KEYS = {
    "method": str,
    "modes": _parse_modes,
    "mu": float,
    "mode-dims": _parse_modes,
    "angles": _parse_modes,
    "alpha-max": int,
    "search": str,
    "beta-search": lambda v: v.lower() == "true",
    "karcher-tol": float,
    "karcher-max-iter": int,
    "classifier": str,
    "weights": str,
    "full-spectrum": lambda v: v.lower() == "true",
    "seed": int,
}


def _build_pipeline_config(args) -> PipelineConfig:
    values: dict = {}
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        for key, value in file_cfg.items():
            if key not in _CONFIG_KEYS:
                raise FormatError(f"unknown config key {key!r}")
            values[key] = _CONFIG_KEYS[key](value)
    flag_map = {
        "method": args.method,
        "modes": args.modes,
        "mu": args.mu,
        "mode-dims": args.mode_dims,
        "angles": args.angles,
        "alpha-max": args.alpha_max,
        "search": args.search,
        "beta-search": args.beta_search,
        "karcher-tol": args.karcher_tol,
        "karcher-max-iter": args.karcher_max_iter,
        "classifier": args.classifier,
        "weights": args.weights,
        "full-spectrum": args.full_spectrum,
        "seed": args.seed,
    }
    for key, value in flag_map.items():
        if value is not None:
            values[key] = value
    try:
        return PipelineConfig(
            method=values.get("method", "nmode-wgds"),
            modes_used=values.get("modes"),
            energy_mu=values.get("mu", 0.90),
            per_mode_dims=values.get("mode-dims"),
            angle_counts=values.get("angles"),
            gds_alpha_max=values.get("alpha-max", 6),
            gds_search=values.get("search", "coordinate"),
            gds_beta_search=values.get("beta-search", False),
            karcher_tol=values.get("karcher-tol", 1e-8),
            karcher_max_iter=values.get("karcher-max-iter", 100),
            classifier=values.get("classifier", "nn"),
            weights=values.get("weights", "auto"),
            full_spectrum=values.get("full-spectrum", False),
            seed=values.get("seed", 0),
        )
    except DimensionError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


class UsageError(Exception):
    pass


def _config_echo_dict(config: PipelineConfig) -> dict:
    return {
        "method": config.method,
        "modes": "auto" if config.modes_used is None else ",".join(map(str, config.modes_used)),
        "mu": config.energy_mu,
        "mode_dims": "auto" if config.per_mode_dims is None else ",".join(map(str, config.per_mode_dims)),
        "angles": "auto" if config.angle_counts is None else ",".join(map(str, config.angle_counts)),
        "alpha_max": config.gds_alpha_max,
        "search": config.gds_search,
        "beta_search": config.gds_beta_search,
        "karcher_tol": config.karcher_tol,
        "karcher_max_iter": config.karcher_max_iter,
        "classifier": config.classifier,
        "weights": config.weights,
        "full_spectrum": config.full_spectrum,
        "projection_tol": config.projection_tol,
        "seed": config.seed,
    }


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    spec = dataio.SynthSpec(
        classes=args.classes,
        samples_per_class=args.samples_per_class,
        dims=_parse_dims(args.dims) if isinstance(args.dims, str) else args.dims,
        shared_dim=args.shared_dim,
        class_dim=args.class_dim,
        within_noise=args.noise,
        seed=args.seed,
    )
    samples, manifest = dataio.generate_synthetic(spec, train_fraction=args.train_frac)
    out = _outdir(args)
    for sample, entry in zip(samples, manifest.entries):
        dataio.write_tensor(out / entry.path, sample)
    dataio.write_manifest(out / "manifest.txt", manifest)
    _echo_config(
        out,
        "gen",
        {
            "classes": spec.classes,
            "samples_per_class": spec.samples_per_class,
            "dims": "x".join(map(str, spec.dims)),
            "shared_dim": spec.shared_dim,
            "class_dim": spec.class_dim,
            "noise": spec.within_noise,
            "seed": spec.seed,
            "train_frac": args.train_frac,
        },
    )
    print(f"wrote {len(samples)} tensors and manifest.txt to {out}")
    return 0


def _load_split(args, split: str):
    manifest = dataio.load_manifest(args.manifest)
    base = Path(args.data_dir) if args.data_dir else Path(args.manifest).parent
    samples, labels = dataio.load_dataset(manifest, base, split=split)
    return manifest, samples, labels


def _cmd_fit(args) -> int:
    config = _build_pipeline_config(args)
    manifest, samples, labels = _load_split(args, "train")
    model = pipeline.fit(samples, labels, config)
    out = _outdir(args)
    dataio.write_model(out / "model.nmdl", model)
    _write_fisher_tables(out, model)
    _echo_config(
        out,
        "fit",
        {"manifest": str(args.manifest), **_config_echo_dict(model.config)},
    )
    _write_summary(
        out,
        {
            "command": "fit",
            "method": model.config.method,
            "train_samples": len(samples),
            "classes": len(model.class_ids),
            "modes": list(model.modes),
            "dims": list(model.dims),
            "gds_alphas": None if model.gds is None else [g.alpha for g in model.gds],
            "gds_betas": None if model.gds is None else [g.beta for g in model.gds],
            "fisher_raw": model.fisher_raw.score_n,
            "fisher_final": model.fisher.score_n,
            "weights": [float(w) for w in model.weights.weights],
        },
    )
    print(f"trained {model.config.method} on {len(samples)} samples -> {out / 'model.nmdl'}")
    return 0


def _cmd_eval(args) -> int:
    model = dataio.read_model(args.model)
    manifest, samples, labels = _load_split(args, args.split)
    metrics = pipeline.evaluate(model, samples, labels)
    bundle = ReportBundle(metrics=metrics, fisher=model.fisher, weights=model.weights)
    out = _outdir(args)
    _write_csv(
        out / "metrics.csv",
        ["class", "name", "recall", "support"],
        (
            [str(cid), manifest.class_names[cid], _fmt(float(metrics.recalls[i])), str(int(metrics.confusion[i].sum()))]
            for i, cid in enumerate(model.class_ids)
        ),
    )
    _write_csv(
        out / "confusion.csv",
        ["true\\pred"] + [str(c) for c in model.class_ids],
        (
            [str(cid)] + [str(int(x)) for x in metrics.confusion[i]]
            for i, cid in enumerate(model.class_ids)
        ),
    )
    _echo_config(
        out,
        "eval",
        {"model": str(args.model), "manifest": str(args.manifest), "split": args.split},
    )
    _write_summary(
        out,
        {
            "command": "eval",
            "split": args.split,
            "samples": bundle.metrics.count,
            "accuracy": bundle.metrics.accuracy,
            "mean_margin": bundle.metrics.mean_margin,
        },
    )
    print(f"accuracy {metrics.accuracy:.4f} on {metrics.count} samples ({args.split})")
    return 0


def _cmd_dist(args) -> int:
    model = dataio.read_model(args.model)
    manifest, samples, labels = _load_split(args, args.split)
    points = [pipeline.transform(model, s) for s in samples]
    dist = pipeline.pairwise_distances(model, points)
    out = _outdir(args)
    _write_csv(out / "distances.csv", None, dist.tolist())
    entries = manifest.subset(args.split)
    _write_csv(
        out / "samples.csv",
        ["index", "path", "label", "split"],
        ([str(i), e.path, str(e.label), e.split] for i, e in enumerate(entries)),
    )
    _echo_config(
        out,
        "dist",
        {"model": str(args.model), "manifest": str(args.manifest), "split": args.split},
    )
    _write_summary(
        out,
        {"command": "dist", "samples": len(points), "split": args.split},
    )
    print(f"wrote {dist.shape[0]}x{dist.shape[1]} distance matrix to {out / 'distances.csv'}")
    return 0


def _read_distance_csv(path) -> np.ndarray:
    try:
        rows = [
            [float(x) for x in line.split(",")]
            for line in Path(path).read_text().strip().splitlines()
        ]
    except OSError as exc:
        raise FormatError(f"cannot read distance matrix {path}: {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"distance matrix {path} has non-numeric entries") from exc
    return np.asarray(rows)


def _cmd_mds(args) -> int:
    dist = _read_distance_csv(args.distances)
    coords, evals = classical_mds(dist, args.k)
    bundle = ReportBundle(distances=dist, coordinates=coords)
    out = _outdir(args)
    _write_csv(
        out / "coords.csv",
        ["index"] + [f"x{i + 1}" for i in range(bundle.coordinates.shape[1])],
        ([str(i)] + [_fmt(float(v)) for v in row] for i, row in enumerate(coords)),
    )
    total = float(np.sum(np.abs(evals)))
    negative = float(np.sum(np.abs(evals[evals < 0])))
    _echo_config(out, "mds", {"distances": str(args.distances), "k": args.k})
    _write_summary(
        out,
        {
            "command": "mds",
            "samples": int(coords.shape[0]),
            "k": args.k,
            "negative_eigenvalue_mass": 0.0 if total == 0 else negative / total,
        },
    )
    print(f"wrote {coords.shape[0]}x{coords.shape[1]} coordinates to {out / 'coords.csv'}")
    return 0


def _cmd_fisher(args) -> int:
    model = dataio.read_model(args.model)
    out = _outdir(args)
    _write_fisher_tables(out, model)
    _echo_config(out, "fisher", {"model": str(args.model)})
    _write_summary(
        out,
        {
            "command": "fisher",
            "fisher_raw": model.fisher_raw.score_n,
            "fisher_final": model.fisher.score_n,
            "weights": [float(w) for w in model.weights.weights],
        },
    )
    print(
        f"separability raw {model.fisher_raw.score_n:.4f} -> final {model.fisher.score_n:.4f}"
    )
    return 0


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--method", choices=pipeline.METHODS)
    p.add_argument("--modes", type=_parse_modes, help="comma list, e.g. 1,2,3")
    p.add_argument("--mu", type=float, help="energy fraction for dimension selection")
    p.add_argument("--mode-dims", type=_parse_modes, help="fixed per-mode dims")
    p.add_argument("--angles", type=_parse_modes, help="per-mode canonical angle counts")
    p.add_argument("--alpha-max", type=int, help="search bound for the leading cut")
    p.add_argument("--search", choices=pipeline.SEARCH_MODES)
    p.add_argument("--beta-search", action="store_const", const=True, default=None)
    p.add_argument("--karcher-tol", type=float)
    p.add_argument("--karcher-max-iter", type=int)
    p.add_argument("--classifier", choices=pipeline.CLASSIFIERS)
    p.add_argument("--weights", choices=pipeline.WEIGHT_SCHEMES)
    p.add_argument("--full-spectrum", action="store_const", const=True, default=None)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tensorgds", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--samples-per-class", type=int, default=10)
    p.add_argument("--dims", default="12x12x12")
    p.add_argument("--shared-dim", type=int, default=1)
    p.add_argument("--class-dim", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.15)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("fit", help="train a model from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--data-dir", help="tensor directory (default: manifest directory)")
    p.add_argument("--out", required=True)
    _add_fit_flags(p)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("eval", help="evaluate a model on a manifest split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--data-dir")
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("dist", help="pairwise distance matrix for a split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--data-dir")
    p.add_argument("--split", choices=("train", "test", "all"), default="all")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_dist)

    p = sub.add_parser("mds", help="classical scaling of a distance matrix")
    p.add_argument("--distances", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_mds)

    p = sub.add_parser("fisher", help="separability tables and weights of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_fisher)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except DegeneracyError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 3
    except DimensionError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
