"""Command line interface: ``annni-gibbs {oracle,sample,fit,embed,sweep}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from .embedding import (circulant, find_disjoint_embeddings, is_valid_embedding, load_embeddings, read_edge_list,
                        write_embeddings)
from .fitting import fit_beta
from .gibbs import boltzmann, spectrum
from .harness import emit_outputs, load_config, reduce_min_tvd, run_sweep
from .ising import AnnniModel, scale
from .sampling import SamplerSpec, ingest_samples, split_parallel_embeddings, write_samples

log = logging.getLogger("annni_gibbs")

FIT_COLUMNS = ("tvd_min", "beta_best", "beta_lo", "beta_hi", "wide_range", "total_samples")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=12, help="number of spins on the ring (default 12)")
    p.add_argument("--j1", type=float, default=1.0, help="ferromagnetic NN strength (default 1)")
    p.add_argument("--j2", type=float, required=True, help="antiferromagnetic NNN strength")


def _open_out(path):
    return open(path, "w", newline="", encoding="utf-8") if path and path != "-" else sys.stdout


def cmd_oracle(args) -> int:
    model = AnnniModel(args.n, args.j2, args.j1)
    out = _open_out(args.output)
    w = csv.writer(out)
    if args.beta is None:
        w.writerow(("energy", "degeneracy"))
        for e, g in spectrum(model):
            w.writerow((repr(float(e)), g))
    else:
        w.writerow(("index", "probability"))
        for i, p in enumerate(boltzmann(model, args.beta).probs.tolist()):
            w.writerow((i, repr(p)))
    if out is not sys.stdout:
        out.close()
    return 0


def cmd_sample(args) -> int:
    model = AnnniModel(args.n, args.j2, args.j1)
    target = model if args.scale == 1 else scale(model, args.scale)
    params = {"beta": args.beta}
    if args.kind == "metropolis":
        params["sweeps"] = args.sweeps
    elif args.kind == "noisy-wrapper":
        params["p"] = args.p
    sampler = SamplerSpec(args.kind, params, args.seed).build()
    dist = sampler.sample(target, args.m)
    header = (f"n={args.n} j1={args.j1} j2={args.j2} scale={args.scale} kind={args.kind} "
              f"{' '.join(f'{k}={v}' for k, v in params.items())} m={args.m} seed={args.seed}")
    write_samples(dist, args.output, header=header)
    log.info("wrote %d samples to %s", dist.total, args.output)
    return 0


def cmd_fit(args) -> int:
    model = AnnniModel(args.n, args.j2, args.j1)
    if args.samples:
        emp = ingest_samples(args.samples, model.n)
    else:
        embeddings = load_embeddings(args.embeddings)
        exclude = [int(x) for x in args.exclude.split(",")] if args.exclude else []
        emp = split_parallel_embeddings(args.raw, embeddings, exclude=exclude)
        if emp.n != model.n:
            raise ValueError(f"embeddings carry {emp.n} logical spins, model has {model.n}")
    r = fit_beta(emp, model)
    out = _open_out(args.output)
    w = csv.writer(out)
    if args.header:
        w.writerow(FIT_COLUMNS)
    w.writerow((repr(r.tvd_min), repr(r.beta_best), repr(r.beta_lo), repr(r.beta_hi),
                "true" if r.wide_range else "false", r.total_samples))
    if out is not sys.stdout:
        out.close()
    return 0


def cmd_embed(args) -> int:
    host = read_edge_list(args.host)
    pattern = circulant(args.n)
    t0 = time.perf_counter()
    embeddings = find_disjoint_embeddings(pattern, host, budget=args.budget, limit=args.limit)
    elapsed = time.perf_counter() - t0
    if not all(is_valid_embedding(pattern, host, e) for e in embeddings):
        raise RuntimeError("search returned an invalid embedding")
    if args.output:
        write_embeddings(embeddings, args.output, pattern=f"C_{args.n}(1,2)", host=str(args.host))
    print(f"{len(embeddings)} disjoint embeddings of C_{args.n}(1,2) into {args.host} "
          f"({len(host.nodes)} nodes, {len(host.edges)} edges) in {elapsed:.1f}s")
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = replace(config, **overrides)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    results = run_sweep(config)
    svg = outdir / "scatter.svg" if (args.svg or config.svg) else None
    emit_outputs(results, outdir / "results.csv", outdir / "min_tvd.csv", svg)
    failed = sum(not r.ok for r in results)
    print(f"{len(results)} cells ({failed} failed) in {time.perf_counter() - t0:.1f}s -> {outdir}")
    for row in reduce_min_tvd(results) if len(results) > failed else []:
        log.info("J2=%g scale=%g TVD=%g beta=%g", row.j2, row.scale, row.tvd_min, row.beta_best)
    return 0 if not failed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annni-gibbs", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="exact spectrum or Gibbs distribution as CSV")
    _model_args(p)
    p.add_argument("--beta", type=float, help="dump the Gibbs distribution at this beta instead of the spectrum")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sample", help="draw samples and write the samples text format")
    _model_args(p)
    p.add_argument("--scale", type=float, default=1.0, help="overall energy scale of the sampled model")
    p.add_argument("--kind", choices=("exact-gibbs", "metropolis", "noisy-wrapper"), default="metropolis")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--p", type=float, default=0.0, help="spin-flip probability for noisy-wrapper")
    p.add_argument("--m", type=int, default=1000, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="fit the effective inverse temperature of a sample set")
    _model_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples", help="samples text file")
    src.add_argument("--raw", help="raw readout CSV (physical columns); needs --embeddings")
    p.add_argument("--embeddings", help="embedding JSON for --raw")
    p.add_argument("--exclude", help="comma-separated embedding positions to drop")
    p.add_argument("--header", action="store_true", help="prefix the output line with a header")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("embed", help="greedy disjoint native embeddings of C_n(1,2)")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--host", required=True, help="host edge-list file")
    p.add_argument("--budget", type=int, help="node expansions per single search")
    p.add_argument("--limit", type=int, help="stop after this many embeddings")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sweep", help="run a (J2 x scale x sampler) sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--svg", action="store_true", help="also write scatter.svg")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "fit" and args.raw and not args.embeddings:
        parser.error("--raw requires --embeddings")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
