"""Command-line entry point: ``qstylegan <command> [options]``.

Commands: gen-data, train, sample, eval, compare, gru-demo.
Exit codes: 0 success, 1 validation error, 2 runtime error.

Configuration comes from an optional JSON file (``--config``) with flag
overrides on top. ``train`` echoes the resolved configuration to
``<output_dir>/config.json``; feeding that file back reproduces the run.
Wall-clock timings only ever go to ``<output_dir>/logs/`` so every CSV is
byte-identical across re-runs.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ._accel import BACKEND
from . import ansatz, latent_data, metrics, neural, recurrent_codec, reference_tables, wgan
from .ansatz import GeneratorConfig
from .errors import (ArgumentError, ConfigurationError, ParseError, QStyleGANError,
                     UndefinedSignificanceError)
from .latent_data import DistributionSpec, LatentDataset, make_rng
from .statevector import shot_estimate

log = logging.getLogger("qstylegan")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

DEFAULT_SEEDS = [1, 2, 3, 4, 5]
EVAL_SAMPLES = 10_000

DEFAULT_RUN = {
    "generator": GeneratorConfig().to_dict(),
    "train": wgan.TrainConfig().to_dict(),
    "data": {"distribution": "normal", "dim": 10, "n": 10_000, "seed": 0, "path": None},
    "seeds": DEFAULT_SEEDS,
    "output_dir": "run",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


# ---------------------------------------------------------------------------
# run configuration


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in update.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_run_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file, then flag overrides; validated and normalized."""
    cfg = copy.deepcopy(DEFAULT_RUN)
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from None
        if not isinstance(user, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = set(user) - set(DEFAULT_RUN)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = _merge(cfg, user)
    cfg = _merge(cfg, overrides or {})
    return validate_run_config(cfg)


def validate_run_config(cfg: dict) -> dict:
    train_fields = set(DEFAULT_RUN["train"])
    unknown = set(cfg["train"]) - train_fields
    if unknown:
        raise ConfigurationError(f"unknown train keys: {', '.join(sorted(unknown))}")
    train_cfg = wgan.TrainConfig(**cfg["train"])
    out = {"train": train_cfg.to_dict()}
    if train_cfg.generator_kind is wgan.GeneratorKind.CLASSICAL:
        out["generator"] = None
    else:
        gen = GeneratorConfig.from_dict(cfg["generator"] or {})
        expected = "simple" if train_cfg.generator_kind is wgan.GeneratorKind.QUANTUM_SIMPLE else "bel"
        if gen.kind.value != expected:
            raise ConfigurationError(
                f"generator_kind {train_cfg.generator_kind.value} needs ansatz {expected!r}, got {gen.kind.value!r}")
        out["generator"] = gen.to_dict()

    data = dict(cfg["data"])
    if data.get("path"):
        out["data"] = {"path": str(data["path"])}
    else:
        spec = DistributionSpec(data.get("distribution", "normal"), int(data.get("dim", 10)))
        n = int(data.get("n", 10_000))
        if n < 1:
            raise ConfigurationError(f"data.n must be >= 1, got {n}")
        out["data"] = {"distribution": spec.kind.value, "dim": spec.dim, "n": n,
                       "seed": int(data.get("seed", 0)), "path": None}
    dim = out["data"].get("dim")
    if out["generator"] is not None and dim is not None:
        latent = GeneratorConfig.from_dict(out["generator"]).latent_dim
        if latent != dim:
            raise ConfigurationError(f"generator latent_dim {latent} != data dim {dim}")

    seeds = cfg["seeds"]
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigurationError("seeds must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigurationError("seeds must be distinct")
    out["seeds"] = list(seeds)
    out["output_dir"] = str(cfg["output_dir"])
    return out


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"


def load_dataset(path) -> LatentDataset:
    path = Path(path)
    if not path.exists():
        raise ArgumentError(f"dataset {path} does not exist")
    with open(path, "rb") as fh:
        head = fh.read(8)
    return latent_data.load_binary(path) if head == b"QSGLATNT" else latent_data.load_csv(path)


def _dataset_for(cfg: dict) -> LatentDataset:
    data = cfg["data"]
    if data.get("path"):
        return load_dataset(data["path"])
    spec = DistributionSpec(data["distribution"], data["dim"])
    return latent_data.sample_synthetic(spec, data["n"], data["seed"])


# ---------------------------------------------------------------------------
# output helpers


def _write_rows(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else repr(float(v)) for v in row) + "\n")


def _format_table(header, rows) -> str:
    cells = [list(header)] + [[c if isinstance(c, str) else f"{c:+.3f}" for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _attach_log(path: Path) -> logging.Handler:
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    return handler


# ---------------------------------------------------------------------------
# commands


def cmd_gen_data(args) -> int:
    spec = DistributionSpec(args.distribution, args.dim)
    if args.n < 1:
        raise ArgumentError(f"--n must be >= 1, got {args.n}")
    ds = latent_data.sample_synthetic(spec, args.n, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "binary":
        latent_data.save_binary(ds, out)
    else:
        latent_data.save_csv(ds, out)
    mean, std = ds.rows.mean(axis=0), ds.rows.std(axis=0, ddof=1) if len(ds) > 1 else np.zeros(ds.dim)
    print(f"wrote {out}: n={len(ds)} dim={ds.dim} distribution={spec.kind.value} seed={args.seed}")
    print(_format_table(["dim", "mean", "std"], [[str(j), mean[j], std[j]] for j in range(ds.dim)]))
    return EXIT_OK


def _train_overrides(args) -> dict:
    over: dict = {}
    train = {k: v for k, v in {
        "epochs": args.epochs, "batch_size": args.batch_size, "learning_rate": args.learning_rate,
        "n_critic": args.n_critic, "lambda_gp": args.lambda_gp, "generator_kind": args.generator_kind,
        "quantum_init_scale": args.init_scale,
    }.items() if v is not None}
    if train:
        over["train"] = train
    gen = {k: v for k, v in {
        "kind": args.ansatz, "n_qb": args.n_qb, "n_layers": args.n_layers, "readout": args.readout,
    }.items() if v is not None}
    if gen:
        over["generator"] = gen
    if args.generator_kind and args.generator_kind.startswith("quantum_") and "kind" not in gen:
        over.setdefault("generator", {})["kind"] = args.generator_kind.split("_", 1)[1]
    if args.dataset is not None:
        over["data"] = {"path": args.dataset}
    if args.seeds is not None:
        over["seeds"] = args.seeds
    if args.output_dir is not None:
        over["output_dir"] = args.output_dir
    return over


def _save_generator(path: Path, g) -> None:
    if isinstance(g, wgan.QuantumGenerator):
        ansatz.save_style_params(path, g.config, g.params)
    else:
        neural.save_network(path, g)


def load_generator(path):
    """Quantum style-parameter or classical network checkpoint."""
    path = Path(path)
    if not path.exists():
        raise ArgumentError(f"checkpoint {path} does not exist")
    first = path.read_text().split("\n", 1)[0]
    if first.startswith("network,"):
        net = neural.load_network(path)
        if not isinstance(net, neural.MlpGenerator):
            raise ArgumentError(f"{path} holds a discriminator, not a generator")
        return net
    config, params = ansatz.load_style_params(path)
    return wgan.QuantumGenerator(config, params)


def _mean_w1(g, dataset: LatentDataset, seed: int) -> float:
    fake = wgan.sample(g, EVAL_SAMPLES, make_rng(seed, "eval/samples"))
    return float(metrics.per_dimension_wasserstein(fake, dataset.rows).mean())


def train_seed(cfg: dict, seed: int, dataset: LatentDataset | None = None) -> dict:
    """Train one seed and write its checkpoints and history; returns the summary row."""
    root = Path(cfg["output_dir"])
    dataset = dataset if dataset is not None else _dataset_for(cfg)
    train_cfg = wgan.TrainConfig(**{**cfg["train"], "seed": seed})
    gen_cfg = GeneratorConfig.from_dict(cfg["generator"]) if cfg["generator"] else None
    if gen_cfg is not None and gen_cfg.latent_dim != dataset.dim:
        raise ConfigurationError(f"generator latent_dim {gen_cfg.latent_dim} != dataset dim {dataset.dim}")

    g0 = wgan.build_generator(train_cfg, dataset.dim, make_rng(seed, "init/generator"), gen_cfg)
    w1_init = _mean_w1(g0, dataset, seed)
    start = time.perf_counter()
    g, d, hist = wgan.train(train_cfg, dataset, gen_cfg)
    elapsed = time.perf_counter() - start

    ckpt = root / "checkpoints" / f"seed_{seed}"
    ckpt.mkdir(parents=True, exist_ok=True)
    _save_generator(ckpt / "generator.csv", g)
    neural.save_network(ckpt / "discriminator.csv", d)
    (root / "histories").mkdir(parents=True, exist_ok=True)
    hist.to_csv(root / "histories" / f"seed_{seed}.csv", include_timing=False)
    log.info("seed %d: %d epochs in %.2f s (%s)", seed, len(hist), elapsed,
             "; ".join(f"{s:.3f}" for s in hist.seconds))
    nan = float("nan")
    return {
        "seed": seed,
        "final_critic_loss": hist.critic_loss[-1] if len(hist) else nan,
        "final_gen_loss": hist.gen_loss[-1] if len(hist) else nan,
        "w1_init": w1_init,
        "w1_final": _mean_w1(g, dataset, seed),
    }


def _train_seed_job(payload):
    cfg, seed = payload
    return train_seed(cfg, seed)


def cmd_train(args) -> int:
    cfg = load_run_config(args.config, _train_overrides(args))
    dataset = _dataset_for(cfg)
    if cfg["generator"] is not None:
        latent = GeneratorConfig.from_dict(cfg["generator"]).latent_dim
        if latent != dataset.dim:
            raise ConfigurationError(f"generator latent_dim {latent} != dataset dim {dataset.dim}")
    if cfg["train"]["batch_size"] > len(dataset) and cfg["train"]["epochs"] > 0:
        raise ConfigurationError(f"batch_size {cfg['train']['batch_size']} exceeds dataset size {len(dataset)}")

    root = Path(cfg["output_dir"])
    for sub in ("checkpoints", "histories", "metrics", "samples", "logs"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(dump_config(cfg))
    handler = _attach_log(root / "logs" / "train.log")
    try:
        log.info("backend=%s seeds=%s", BACKEND, cfg["seeds"])
        if args.jobs > 1 and len(cfg["seeds"]) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_train_seed_job, [(cfg, s) for s in cfg["seeds"]]))
        else:
            rows = []
            for s in cfg["seeds"]:
                rows.append(train_seed(cfg, s, dataset))
                print(f"seed {s}: W1 {rows[-1]['w1_init']:.4f} -> {rows[-1]['w1_final']:.4f}", flush=True)
    finally:
        log.removeHandler(handler)
        handler.close()

    keys = ["final_critic_loss", "final_gen_loss", "w1_init", "w1_final"]
    _write_rows(root / "metrics" / "train_seeds.csv", ["seed"] + keys,
                [[str(r["seed"])] + [r[k] for k in keys] for r in rows])
    summary = []
    for k in keys:
        vals = np.array([r[k] for r in rows])
        std = vals.std(ddof=1) if len(vals) > 1 else 0.0
        summary.append([k, vals.mean(), std, float(np.median(vals))])
    _write_rows(root / "metrics" / "train_summary.csv", ["quantity", "mean", "std", "median"], summary)
    print(_format_table(["quantity", "mean", "std", "median"], summary))
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 1:
        raise ArgumentError(f"--n must be >= 1, got {args.n}")
    if args.shots is not None and args.shots < 1:
        raise ArgumentError(f"--shots must be >= 1, got {args.shots}")
    g = load_generator(args.checkpoint)
    rng = make_rng(args.seed, "sample")
    if isinstance(g, wgan.QuantumGenerator):
        noise = g.draw_noise(args.n, rng)
        raw = ansatz.raw_latent(g.config, g.params, noise)
        if args.shots is not None:
            raw = shot_estimate(raw, args.shots, make_rng(args.seed, "sample/shots"))
        rows = ansatz.apply_output_scale(g.config, raw)
    else:
        if args.shots is not None:
            raise ArgumentError("--shots applies to quantum generators only")
        rows = wgan.sample(g, args.n, rng)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    latent_data.save_csv(LatentDataset(rows), out)
    print(f"wrote {out}: {rows.shape[0]} rows x {rows.shape[1]} dims"
          + (f" ({args.shots} shots)" if args.shots else " (exact expectations)"))
    return EXIT_OK


def cmd_eval(args) -> int:
    gen = load_dataset(args.generated)
    ref = load_dataset(args.reference)
    if gen.dim != ref.dim:
        raise ArgumentError(f"dimension mismatch: generated {gen.dim} vs reference {ref.dim}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    w1 = metrics.per_dimension_wasserstein(gen.rows, ref.rows)
    _write_rows(out / "wasserstein.csv", ["dim", "w1"], [[str(j), w1[j]] for j in range(gen.dim)])

    def moments(ds):
        std = ds.rows.std(axis=0, ddof=1) if len(ds) > 1 else np.zeros(ds.dim)
        return ds.rows.mean(axis=0), std

    gm, gs = moments(gen)
    rm, rs = moments(ref)
    _write_rows(out / "moments.csv", ["dim", "gen_mean", "gen_std", "ref_mean", "ref_std"],
                [[str(j), gm[j], gs[j], rm[j], rs[j]] for j in range(gen.dim)])
    for label, ds in (("generated", gen), ("reference", ref)):
        corr = metrics.correlation_matrix(ds)
        _write_rows(out / f"correlation_{label}.csv", [f"d{j}" for j in range(ds.dim)], corr)
    print(_format_table(["dim", "w1", "gen_mean", "gen_std"],
                        [[str(j), w1[j], gm[j], gs[j]] for j in range(gen.dim)]))
    print(f"mean W1 = {w1.mean():.4f}")
    return EXIT_OK


def _load_table(token: str):
    path = Path(token)
    if path.exists():
        return metrics.load_scenario_table(path)
    if token in reference_tables.available():
        return reference_tables.load(token)
    raise ArgumentError(f"{token!r} is neither a file nor a packaged table "
                        f"({', '.join(reference_tables.available())})")


def cmd_compare(args) -> int:
    if args.list:
        print("\n".join(reference_tables.available()))
        return EXIT_OK
    if args.reference is None or not args.tests:
        raise ArgumentError("compare needs a reference table and at least one test table")
    ref = _load_table(args.reference)
    tests = [_load_table(t) for t in args.tests]
    per = [metrics.z0_per_metric(ref, t) for t in tests]
    names = ref.names()
    rows = [[n] + [p[n] for p in per] for n in names]
    avg = [float(np.mean(list(p.values()))) for p in per]
    rows.append(["<Z0>"] + avg)
    header = ["metric"] + [t.scenario for t in tests]
    if args.out:
        _write_rows(args.out, header, rows)
    print(f"reference: {ref.scenario}")
    print(_format_table(header, rows))
    printed = [t for t in tests if t.printed_z0]
    for t in printed:
        print(f"{t.scenario}: average of transcribed Z0 = {metrics.printed_z0_average(t):+.3f}")
    return EXIT_OK


def cmd_gru_demo(args) -> int:
    if args.length < 0 or args.input_dim < 1 or args.hidden_dim < 1:
        raise ArgumentError("length must be >= 0 and dims >= 1")
    rng = make_rng(args.seed, "gru-demo")
    w_f = recurrent_codec.GruWeights.random(args.input_dim, args.hidden_dim, rng)
    w_b = recurrent_codec.GruWeights.random(args.input_dim, args.hidden_dim, rng)
    xs = rng.standard_normal((args.length, args.input_dim))
    h0 = np.zeros(args.hidden_dim)
    enc = recurrent_codec.bidirectional(xs, h0, h0, w_f, w_b)
    enc = recurrent_codec.dropout_between_layers(enc, args.dropout, rng)
    if args.out:
        _write_rows(args.out, ["index", "value"], [[str(i), v] for i, v in enumerate(enc)])
    print(f"bidirectional encoding ({enc.size} = 2 x {args.hidden_dim}), dropout p={args.dropout}:")
    print(" ".join(f"{v:+.4f}" for v in enc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qstylegan", description="Style-based quantum WGAN-GP on latent vectors.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="write a synthetic latent dataset")
    g.add_argument("--distribution", default="normal", choices=[k.value for k in latent_data.DistributionKind])
    g.add_argument("--dim", type=int, default=10)
    g.add_argument("--n", type=int, default=10_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=["csv", "binary"], default="csv")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train one generator per seed")
    t.add_argument("--config")
    t.add_argument("--output-dir")
    t.add_argument("--dataset", help="latent CSV or binary file (overrides the synthetic spec)")
    t.add_argument("--seeds", type=int, nargs="+")
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--learning-rate", type=float)
    t.add_argument("--n-critic", type=int)
    t.add_argument("--lambda-gp", type=float)
    t.add_argument("--init-scale", type=float)
    t.add_argument("--generator-kind", choices=[k.value for k in wgan.GeneratorKind])
    t.add_argument("--ansatz", choices=[k.value for k in ansatz.AnsatzKind])
    t.add_argument("--n-qb", type=int)
    t.add_argument("--n-layers", type=int)
    t.add_argument("--readout", choices=[r.value for r in ansatz.Readout])
    t.add_argument("--jobs", type=int, default=1, help="train seeds in this many processes")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="sample latent vectors from a generator checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--n", type=int, default=2_500)
    s.add_argument("--shots", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("eval", help="compare a generated latent file with a reference")
    e.add_argument("--generated", required=True)
    e.add_argument("--reference", required=True)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", help="Z0 significance of test scenarios against a reference")
    c.add_argument("reference", nargs="?", help="scenario CSV or packaged table name")
    c.add_argument("tests", nargs="*")
    c.add_argument("--out")
    c.add_argument("--list", action="store_true", help="list packaged tables")
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("gru-demo", help="run a bidirectional GRU encoding on random input")
    r.add_argument("--input-dim", type=int, default=4)
    r.add_argument("--hidden-dim", type=int, default=8)
    r.add_argument("--length", type=int, default=12)
    r.add_argument("--dropout", type=float, default=0.0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_gru_demo)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ArgumentError, ConfigurationError, ParseError, UndefinedSignificanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, QStyleGANError, ValueError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
