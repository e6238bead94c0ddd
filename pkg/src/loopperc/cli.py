"""Command-line runner: ``loopperc <task> [options]``.

Every output embeds a metadata header (tool version, spec hash, seed, wall
time). Data sections depend only on the resolved settings, so re-running with the
same seed reproduces them byte for byte.

Exit codes: 0 ok, 2 invalid input, 3 numeric guard tripped, 4 invariant violated.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import tomli

from . import __version__
from .blocking import indicators
from .config import LinkConfig, Params
from .domination import VARIANTS, DeltaInputs, delta, verify_theorem1_exact
from .graph import INF, Graph, GraphError, build_box, read_edge_list, vertex_distances
from .loops import decompose
from .oracle import GuardError, enumerate_configs, naive_trace
from .percolation import Estimate, InvariantError, chain_draw, decay_profile, direct_draw, reach_samples
from .sampler import DEFAULT_SEED, MetropolisChain, SamplerConfig, chain_seeds, direct_arrays, integrated_autocorrelation

EXIT_OK, EXIT_SPEC, EXIT_GUARD, EXIT_INVARIANT = 0, 2, 3, 4
WORKERS_ENV = "LOOPPERC_WORKERS"
TASKS = ("delta", "sample", "indicators", "reach", "decay", "verify-loops", "verify-domination", "enumerate")


class SpecError(ValueError):
    pass


def parse_graph(spec: str) -> Graph:
    """``box:d:side[:periodic]``, ``path:n``, ``star:k``, ``cycle:n`` or ``edge``."""
    kind, *args = spec.split(":")
    try:
        if kind == "box":
            if len(args) not in (2, 3) or (len(args) == 3 and args[2] != "periodic"):
                raise SpecError(f"box graph spec is box:d:side[:periodic], got {spec!r}")
            return build_box(int(args[0]), int(args[1]), periodic=len(args) == 3)
        if kind == "path":
            n = int(args[0])
            return Graph.from_edges(n + 1, [(i, i + 1) for i in range(n)])
        if kind == "star":
            k = int(args[0])
            return Graph.from_edges(k + 1, [(0, i) for i in range(1, k + 1)])
        if kind == "cycle":
            n = int(args[0])
            return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
        if kind == "edge" and not args:
            return Graph.from_edges(2, [(0, 1)])
    except (ValueError, IndexError, GraphError) as exc:
        raise SpecError(f"bad graph spec {spec!r}: {exc}") from exc
    raise SpecError(f"unknown graph spec {spec!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file whose keys mirror the long options")
    common.add_argument("--graph", default=None, help="box:d:side[:periodic], path:n, star:k, cycle:n or edge")
    common.add_argument("--graph-file", default=None, help="edge list, one 'u v' pair per line")
    common.add_argument("--beta", type=float)
    common.add_argument("--u", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--seed", default=None, help="integer, or 'random' for OS entropy")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--dump-config", action="store_true", help="print the resolved settings and exit")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--burn-in", type=int)
    chain.add_argument("--thin", type=int)

    mc = argparse.ArgumentParser(add_help=False, parents=[chain])
    mc.add_argument("--samples", type=int)
    mc.add_argument("--chains", type=int)
    mc.add_argument("--method", choices=("auto", "direct", "mcmc"))

    ap = argparse.ArgumentParser(prog="loopperc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="task", required=True)

    p = sub.add_parser("delta", parents=[common], help="the domination parameter delta")
    p.add_argument("--K", type=int)
    p.add_argument("--variant", choices=VARIANTS)

    sub.add_parser("sample", parents=[common, mc], help="draw configurations, one summary row each")

    p = sub.add_parser("indicators", parents=[common, chain], help="per-edge open/blocking/nb of one configuration")
    p.add_argument("--links", help="JSON link configuration; default draws one sample")

    p = sub.add_parser("reach", parents=[common, mc], help="loop and link reach probabilities")
    p.add_argument("--source", type=int)
    p.add_argument("--radius", type=int)

    p = sub.add_parser("decay", parents=[common], help="boundary-reach profile on centered boxes")
    p.add_argument("--ns", help="comma separated radii, e.g. 4,8,12,16")
    p.add_argument("--samples", type=int)
    p.add_argument("--dimension", type=int)

    p = sub.add_parser("verify-loops", parents=[common], help="compare decompose against the arc-gluing oracle")
    p.add_argument("--trials", type=int)
    p.add_argument("--max-vertices", type=int)
    p.add_argument("--max-links", type=int)

    p = sub.add_parser("verify-domination", parents=[common], help="exact blocking-domination check")
    p.add_argument("--edge", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--K", type=int)

    p = sub.add_parser("enumerate", parents=[common], help="exact truncated distribution")
    p.add_argument("--n-max", type=int)
    return ap


DEFAULTS = {
    "graph": None,
    "graph_file": None,
    "beta": None,
    "u": 1.0,
    "theta": 1.0,
    "seed": DEFAULT_SEED,
    "format": None,
    "samples": 1000,
    "burn_in": SamplerConfig.burn_in,
    "thin": SamplerConfig.thin,
    "chains": 1,
    "method": "auto",
    "K": None,
    "variant": "proof",
    "links": None,
    "source": None,
    "radius": None,
    "ns": "4,8,12,16",
    "dimension": 2,
    "trials": 1000,
    "max_vertices": 8,
    "max_links": 10,
    "edge": 0,
    "n_max": 8,
}

REQUIRED = {
    "delta": ("beta", "K"),
    "sample": ("graph", "beta"),
    "indicators": ("graph", "beta"),
    "reach": ("graph", "beta", "radius"),
    "decay": ("beta",),
    "verify-loops": (),
    "verify-domination": ("graph", "beta"),
    "enumerate": ("graph", "beta"),
}

DEFAULT_FORMAT = {"delta": "json", "verify-loops": "json", "verify-domination": "json", "enumerate": "json"}


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < TOML config < command line into one flat settings dict."""
    spec = {"task": args.task}
    keys = [k for k in vars(args) if k not in ("task", "config", "output", "dump_config")]
    file_values = {}
    if args.config:
        try:
            file_values = tomli.loads(Path(args.config).read_text())
        except (OSError, tomli.TOMLDecodeError) as exc:
            raise SpecError(f"--config: {exc}") from exc
        file_values = {k.replace("-", "_"): v for k, v in file_values.items()}
        unknown = set(file_values) - set(keys)
        if unknown:
            raise SpecError(f"--config: unknown keys for {args.task}: {sorted(unknown)}")
    for k in keys:
        v = getattr(args, k)
        if v is None:
            v = file_values.get(k, DEFAULTS.get(k))
        spec[k] = v
    if spec.get("graph") is not None and spec.get("graph_file") is not None:
        raise SpecError("give either graph or graph_file, not both")
    if spec.get("graph_file") is not None:
        spec["graph"] = None
    for k in REQUIRED[args.task]:
        if k == "graph":
            if spec.get("graph") is None and spec.get("graph_file") is None:
                raise SpecError("graph: required (--graph or --graph-file)")
        elif spec.get(k) is None:
            raise SpecError(f"{k}: required for {args.task}")
    if spec["format"] is None:
        spec["format"] = DEFAULT_FORMAT.get(args.task, "csv")
    seed = spec.get("seed")
    if seed == "random":
        spec["seed"] = random.SystemRandom().randrange(2**63)
    else:
        try:
            spec["seed"] = int(seed)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"seed: expected an integer or 'random', got {seed!r}") from exc
    return spec


def _graph(spec) -> Graph:
    if spec.get("graph_file"):
        try:
            return read_edge_list(spec["graph_file"])
        except (OSError, GraphError, ValueError) as exc:
            raise SpecError(f"graph_file: {exc}") from exc
    return parse_graph(spec["graph"])


def _params(spec) -> Params:
    try:
        return Params(spec["beta"], spec["u"], spec["theta"])
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def _sampler_config(spec, seed) -> SamplerConfig:
    try:
        return SamplerConfig(seed=seed, burn_in=spec["burn_in"], thin=spec["thin"])
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise SpecError(f"{WORKERS_ENV} must be an integer")


def _use_direct(spec, p: Params) -> bool:
    method = spec["method"]
    if method == "direct" and p.theta != 1:
        raise SpecError("method: direct sampling needs theta = 1")
    return method == "direct" or (method == "auto" and p.theta == 1)


# ---------------------------------------------------------------- tasks
# Each task returns (columns, rows) for tabular data or a dict for structured data.


# Per-run diagnostics (acceptance rates, autocorrelation); they go into the metadata.
DIAGNOSTICS: dict = {}


def task_delta(spec):
    d = DeltaInputs(spec["beta"], spec["u"], spec["theta"], spec["K"])
    values = {v: delta(d, v) for v in VARIANTS}
    ratio = values["theorem_statement"] / values["proof"] if values["proof"] else None
    return {"selected": spec["variant"], "delta": values[spec["variant"]], "variants": values, "ratio_theorem_to_proof": ratio}


def _chain_rows(args):
    g, p, cfg, count, chain_index = args
    chain = MetropolisChain(g, p, cfg)
    rows = []
    for k, c in enumerate(chain.samples(count)):
        ind = indicators(g, c)
        rows.append((chain_index, k, c.n, chain.loop_count, int(ind.open.sum()), int(ind.blocking.sum())))
    diag = {
        "acceptance": chain.stats.acceptance_rates(),
        "iat_n": integrated_autocorrelation([r[2] for r in rows]) if rows else None,
    }
    return rows, diag


def task_sample(spec):
    g, p = _graph(spec), _params(spec)
    columns = ("chain", "sample", "n", "loops", "open_edges", "blocking_edges")
    total, chains = spec["samples"], max(1, spec["chains"])
    if total < 0:
        raise SpecError("samples must be >= 0")
    per_chain = [total // chains + (1 if i < total % chains else 0) for i in range(chains)]
    rows = []
    if _use_direct(spec, p):
        for i, (seed, count) in enumerate(zip(chain_seeds(spec["seed"], chains), per_chain)):
            rng = np.random.default_rng(seed)
            for k in range(count):
                c = LinkConfig.from_arrays(*direct_arrays(g, p, rng))
                ind = indicators(g, c)
                rows.append((i, k, c.n, decompose(g, c).total_loops, int(ind.open.sum()), int(ind.blocking.sum())))
        return columns, rows
    jobs = [
        (g, p, _sampler_config(spec, seed), count, i)
        for i, (seed, count) in enumerate(zip(chain_seeds(spec["seed"], chains), per_chain))
    ]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_chain_rows, jobs))
    else:
        results = [_chain_rows(j) for j in jobs]
    for r, _ in results:
        rows.extend(r)
    DIAGNOSTICS["chains"] = [d for _, d in results]
    return columns, rows


def task_indicators(spec):
    g, p = _graph(spec), _params(spec)
    if spec["links"]:
        try:
            c = LinkConfig.from_json(Path(spec["links"]).read_text())
            c.validate(g)
        except (OSError, ValueError, KeyError, IndexError) as exc:
            raise SpecError(f"links: {exc}") from exc
    elif p.theta == 1:
        c = LinkConfig.from_arrays(*direct_arrays(g, p, np.random.default_rng(spec["seed"])))
    else:
        c = next(MetropolisChain(g, p, _sampler_config(spec, spec["seed"])).samples(1))
    ind = indicators(g, c)
    ind.check()
    rows = [(e, int(ind.open[e]), int(ind.blocking[e]), int(ind.nb[e])) for e in range(g.edge_count)]
    return ("edge", "open", "blocking", "nb"), rows


def task_reach(spec):
    g, p = _graph(spec), _params(spec)
    source = spec["source"] if spec["source"] is not None else (g.vertex_count - 1) // 2
    g.check_vertex(source)
    if spec["samples"] < 0:
        raise SpecError("samples must be >= 0")
    if _use_direct(spec, p):
        draw = direct_draw(g, p, np.random.default_rng(spec["seed"]))
    else:
        draw = chain_draw(MetropolisChain(g, p, _sampler_config(spec, spec["seed"])))
    dist = vertex_distances(g, source)
    finite = dist[dist != INF]
    if spec["radius"] > finite.max():
        raise SpecError(f"radius {spec['radius']} exceeds the largest distance {finite.max()} from {source}")
    targets = np.flatnonzero((dist >= spec["radius"]) & (dist != INF))
    loop_hits, link_hits = reach_samples(g, source, targets, spec["samples"], draw)
    rows = []
    for kind, hits in (("loop", loop_hits), ("link", link_hits)):
        e = Estimate.from_counts(int(hits.sum()), spec["samples"])
        rows.append((kind, e.estimate, e.ci_low, e.ci_high, e.samples))
    return ("kind", "estimate", "ci_low", "ci_high", "samples"), rows


def task_decay(spec):
    p = _params(spec)
    if p.theta != 1:
        raise SpecError("decay uses exact sampling and needs theta = 1")
    try:
        ns = [int(x) for x in str(spec["ns"]).split(",") if x.strip()]
    except ValueError as exc:
        raise SpecError(f"ns: {exc}") from exc
    if any(n < 0 for n in ns):
        raise SpecError("ns must be >= 0")
    prof = decay_profile(ns, p, spec["samples"], np.random.default_rng(spec["seed"]), spec["dimension"])
    rows = list(prof.csv_rows())
    return rows[0], rows[1:]


def random_instance(rng: random.Random, max_vertices: int, max_links: int) -> tuple[Graph, LinkConfig]:
    while True:
        V = rng.randint(1, max_vertices)
        pairs = [(a, b) for a in range(V) for b in range(a + 1, V) if rng.random() < 0.5]
        if pairs:
            break
    g = Graph.from_edges(V, pairs)
    n = rng.randint(0, max_links)
    c = LinkConfig(tuple((rng.randrange(len(pairs)), rng.choice((1, -1))) for _ in range(n)))
    return g, c


def loops_agree(g: Graph, c: LinkConfig) -> bool:
    a, b = decompose(g, c), naive_trace(g, c)
    return a.total_loops == b.total_loops and a.levels == b.levels


def task_verify_loops(spec):
    rng = random.Random(spec["seed"])
    failures = []
    for k in range(spec["trials"]):
        g, c = random_instance(rng, spec["max_vertices"], spec["max_links"])
        if not loops_agree(g, c):
            failures.append({"trial": k, "edges": [list(e) for e in g.edges], "links": [list(x) for x in c.links]})
    report = {"trials": spec["trials"], "mismatches": len(failures), "examples": failures[:5]}
    if failures:
        raise InvariantError(json.dumps(report))
    return report


def task_verify_domination(spec):
    g, p = _graph(spec), _params(spec)
    report = verify_theorem1_exact(g, spec["edge"], p, spec["n_max"], spec["K"]).to_dict()
    if report["verdict"] == "violated":
        raise InvariantError(json.dumps(report))
    if report["verdict"] == "inconclusive":
        raise GuardError(json.dumps(report))
    return report


def task_enumerate(spec):
    g, p = _graph(spec), _params(spec)
    dist = enumerate_configs(g, p, spec["n_max"], materialize_limit=10_000)
    t = dist.table
    out = {
        "n_max": spec["n_max"],
        "support": t.size,
        "truncation_bound": dist.truncation_bound,
        "length_distribution": np.bincount(t.n, weights=dist.probabilities).tolist(),
        "mean_loops": float(np.dot(dist.probabilities, t.loops)),
    }
    if dist.entries is not None:
        out["entries"] = [{"links": [list(x) for x in c.links], "probability": q} for c, q in dist.entries.items()]
    return out


HANDLERS = {
    "delta": task_delta,
    "sample": task_sample,
    "indicators": task_indicators,
    "reach": task_reach,
    "decay": task_decay,
    "verify-loops": task_verify_loops,
    "verify-domination": task_verify_domination,
    "enumerate": task_enumerate,
}


def spec_hash(spec: dict) -> str:
    return hashlib.sha256(json.dumps(spec, sort_keys=True).encode()).hexdigest()[:16]


def render(result, fmt: str, meta: dict) -> str:
    """Metadata header followed by the data section."""
    if isinstance(result, tuple):
        columns, rows = result
        if fmt == "json":
            data = [dict(zip(columns, r)) for r in rows]
            return json.dumps({"metadata": meta, "data": data}, indent=2) + "\n"
        buf = io.StringIO()
        buf.write(f"# {json.dumps(meta, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {json.dumps(meta, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("key", "value"))
        for k, v in result.items():
            writer.writerow((k, json.dumps(v) if isinstance(v, (dict, list)) else v))
        return buf.getvalue()
    return json.dumps({"metadata": meta, "data": result}, indent=2) + "\n"


def data_section(text: str) -> str:
    """The part of a rendered output that must be reproducible (metadata stripped)."""
    if text.startswith("{"):
        return json.dumps(json.loads(text)["data"], sort_keys=True)
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("# "))


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        spec = resolve(args)
        if args.dump_config:
            stdout.write(json.dumps(spec, indent=2, sort_keys=True) + "\n")
            return EXIT_OK
        start = time.perf_counter()
        DIAGNOSTICS.clear()
        result = HANDLERS[spec["task"]](spec)
        meta = {
            "tool": "loopperc",
            "version": __version__,
            "spec_hash": spec_hash(spec),
            "seed": spec["seed"],
            "wall_time_s": round(time.perf_counter() - start, 6),
        }
        if DIAGNOSTICS:
            meta["diagnostics"] = dict(DIAGNOSTICS)
        text = render(result, spec["format"], meta)
    except SpecError as exc:
        stderr.write(f"loopperc: invalid input: {exc}\n")
        return EXIT_SPEC
    except (GraphError, IndexError) as exc:
        stderr.write(f"loopperc: invalid input: {exc}\n")
        return EXIT_SPEC
    except GuardError as exc:
        stderr.write(f"loopperc: guard tripped: {exc}\n")
        return EXIT_GUARD
    except (InvariantError, AssertionError) as exc:
        stderr.write(f"loopperc: invariant violated: {exc}\n")
        return EXIT_INVARIANT
    except ValueError as exc:
        stderr.write(f"loopperc: invalid input: {exc}\n")
        return EXIT_SPEC
    if args.output:
        Path(args.output).write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())
