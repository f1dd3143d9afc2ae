"""Command line front end and reproducible audit reports.

Exit codes: 0 when every executed check passes, 1 when a check fails,
2 for invalid parameters, 3 when a resource cap is hit.

Resource caps come from the environment:

``WISERD_MAX_VERTICES``      vertex cap for patches (default 3000000)
``WISERD_MAX_ELEMENTS``      element cap for balls (default 2000000)
``WISERD_MAX_BALL_RADIUS``   largest ball used by convolution scans (default 7)
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import random
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .errors import (ConfigError, LemmaViolation, ResourceLimitError, RetractFailure, WiserdError)

SCHEMA = "wiserd.report/1"


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    command: str
    radius: int = 2
    samples: int = 20
    seed: int = 0
    area_constant: int = 16
    subdivision: int = 8
    rmax: int = 3
    cap: int = 5
    words: list = field(default_factory=list)
    saturated: bool = False
    out: str | None = None
    fmt: str = "json"

    def validate(self) -> "RunConfig":
        for name in ("radius", "samples", "seed", "rmax", "cap"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ConfigError(f"{name} must be a nonnegative integer")
        if self.area_constant < 1:
            raise ConfigError("area constant must be positive")
        if self.subdivision < 1:
            raise ConfigError("subdivision must be positive")
        if self.fmt not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        from .words import ALPHABET
        for w in self.words:
            if any(ch not in ALPHABET for ch in w):
                raise ConfigError(f"bad word {w!r}")
        return self

    def digest(self) -> str:
        d = asdict(self)
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        v = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer") from exc
    if v <= 0:
        raise ConfigError(f"{name} must be positive")
    return v


# ---------------------------------------------------------------- tables


def emit_plot_data(table) -> str:
    """Headered CSV for a list of rows (dicts with identical keys, or tuples)."""
    if not table:
        raise ConfigError("empty table")
    rows = [r if isinstance(r, dict) else {f"c{k}": v for k, v in enumerate(r)} for r in table]
    cols = list(rows[0])
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for r in rows:
        if list(r) != cols:
            raise ConfigError("rows must share the same columns")
        wr.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_cell(s: str):
    if s in ("true", "false"):
        return s == "true"
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def parse_plot_data(text: str) -> list[dict]:
    rd = csv.reader(io.StringIO(text))
    head = next(rd)
    return [dict(zip(head, (_parse_cell(c) for c in row))) for row in rd]


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- checks


def _verdict(ok: bool, **detail) -> dict:
    return {"status": "pass" if ok else "fail", **detail}


def link_audit() -> dict:
    from .link_graph import TWO_PI, angle_identity_error, build_link

    L = build_link()
    census = L.census()
    g = L.girth()
    audit = L.lemma_audit()
    non_bold = {k: v for k, v in census.items() if k.startswith("NonBold")}
    ok_census = (len(L.vertices) == 10 and len(L.edges) == 16 and g == TWO_PI
                 and census.get("Bold") == 1 and sum(non_bold.values()) == 6
                 and non_bold.get("NonBoldPiPi") == 1 and non_bold.get("NonBoldHalfHalfPi") == 4
                 and non_bold.get("NonBoldFourHalves") == 1)
    err = angle_identity_error()
    return {
        "link_census": _verdict(ok_census, vertices=len(L.vertices), edges=len(L.edges),
                                girth=g.label(), census=census),
        "link_lemma": _verdict(audit["failures"] == 0, **audit),
        "angle_identity": _verdict(err < 1e-12, error=err),
    }


def ball_check(radius: int, pairs: int, rng: random.Random, area_constant: int) -> dict:
    from .cover_builder import build_patch
    from .group_core import Ball, DistinctCertified, Equal, equal_in_G, area_bound_for
    from .rd_lab import random_word

    B = Ball(radius, env_int("WISERD_MAX_ELEMENTS", 2_000_000))
    sizes = [B.size(r) for r in range(radius + 1)]
    patch_sizes = [build_patch(r, env_int("WISERD_MAX_VERTICES", 3_000_000)).n_vertices
                   for r in range(radius + 1)]
    contradictions = 0
    verdicts = {"Equal": 0, "DistinctCertified": 0, "Unknown": 0}
    for _ in range(pairs):
        w1 = random_word(rng, rng.randint(0, 6))
        # half of the pairs are equal by construction
        if rng.random() < 0.5:
            w2 = _scramble(w1, rng)
        else:
            w2 = random_word(rng, rng.randint(0, 6))
        v12 = equal_in_G(w1, w2, area_constant * (len(w1) + len(w2)) ** 2)
        v21 = equal_in_G(w2, w1, area_bound_for(w2, w1, area_constant))
        kinds = {type(v12), type(v21)}
        if Equal in kinds and DistinctCertified in kinds:
            contradictions += 1
        name = type(v12).__name__
        verdicts[name if name in verdicts else "Unknown"] += 1
    return _verdict(sizes == patch_sizes and contradictions == 0, ball_sizes=sizes,
                    patch_sizes=patch_sizes, contradictions=contradictions, verdicts=verdicts)


def _scramble(w: str, rng: random.Random) -> str:
    """An equal word: insert a conjugated relator at a random position."""
    from .group_core import RELATORS
    from .words import free_reduce, inverse

    r = rng.choice(RELATORS)
    k = rng.randint(0, len(w))
    x = rng.choice("aAbBcCsStT")
    return free_reduce(w[:k] + x + r + inverse(x) + w[k:])


def chromosome_check(radius: int) -> dict:
    from .cover_builder import chromosome_census

    c = chromosome_census(radius)
    return _verdict(c["unclassifiable"] == 0, **c)


def triangle_check(samples: int, rng: random.Random) -> dict:
    from . import envelope_engine as ee
    from .development import Development
    from .geometry import vertex_point
    from .rd_lab import random_word

    dev = Development()
    counts = {"frizes": 0, "midpoint": 0, "reduce": 0, "saturated": 0}
    outcomes = {"TripleIntersection": 0, "ResidualTriangle": 0}
    for _ in range(samples):
        ws = [random_word(rng, rng.randint(0, 6)) for _ in range(2)]
        A = vertex_point(dev.base)
        B, C = (vertex_point(dev.locate(w)) for w in ws)
        sides = [ee.geodesic(A, B), ee.geodesic(B, C), ee.geodesic(A, C)]
        counts["frizes"] += ee.check_frizes(A, B, C)
        counts["midpoint"] += ee.check_midpoint_balls(A, B, C, sides)
        try:
            res = ee.triangle_reduce(A, B, C, sides)
            counts["reduce"] += 1
            outcomes[type(res).__name__] += 1
        except LemmaViolation:
            pass
        try:
            ee.triangle_reduce_saturated(A, B, C, sides)
            counts["saturated"] += 1
        except LemmaViolation:
            pass
    ok = all(v == samples for v in counts.values())
    return _verdict(ok, samples=samples, passed=counts, outcomes=outcomes)


def branching_check(samples: int, rng: random.Random, rmax: int) -> dict:
    from . import rd_lab as rl
    from .group_core import Ball, normal_form

    B = Ball(4)
    lengths = rl.Lengths(B)
    zs = [B.nfs[i] for i in range(B.size(1))]
    mism = 0
    for z in zs:
        h = rl.hull(z)
        for r in range(1, 2):
            if lengths(z) >= r or lengths(z) == 0:
                if rl.three_paths(z, r, lengths, h).members != rl.brute_force_three_paths(
                        z, r, B, lengths, h):
                    mism += 1
    audit = rl.growth_audit(max(rmax, 3), zs, lengths)
    audit.p3_table = rl.flat_triangle_census([B.nfs[i] for i in range(B.size(3))], max(rmax, 3))
    pairs = [(normal_form(rl.random_word(rng, rng.randint(1, 5))),
              normal_form(rl.random_word(rng, rng.randint(1, 5)))) for _ in range(samples)]
    try:
        ret = rl.retract_audit(pairs, lengths)
        audit.p2_rows, audit.p2_fit, audit.witnesses = ret.p2_rows, ret.p2_fit, ret.witnesses
        retract_ok = True
    except RetractFailure as exc:
        retract_ok = False
        audit.p2_fit = None
        audit.p2_rows = [("failure", str(exc))]
    p3 = [c for _, c in audit.p3_table[1:]]
    ok = (mism == 0 and retract_ok and audit.p1_fit[0] <= 6.5 and len(set(p3)) <= 1)
    d = audit.to_dict()
    d["three_path_mismatches"] = mism
    return _verdict(ok, **d)


def rd_check(rmax: int, cap: int) -> dict:
    from .rd_lab import rd_scan, slope_table

    rows, mono = rd_scan(rmax, cap)
    ok = mono and all(r["lower_bound"] <= r["power_bound"] + 1e-12
                      and r["power_bound"] <= r["young_ceiling"] + 1e-12 for r in rows)
    return _verdict(ok, rows=rows, monotone=mono, slopes=[list(s) for s in slope_table(rows)])


# ---------------------------------------------------------------- commands


def _out(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _exit_for(verdicts: dict) -> int:
    return 0 if all(v.get("status") != "fail" for v in verdicts.values()) else 1


def cmd_build_ball(cfg: RunConfig) -> int:
    from .cover_builder import build_patch
    from .group_core import Ball

    if cfg.fmt == "csv":
        B = Ball(cfg.radius, env_int("WISERD_MAX_ELEMENTS", 2_000_000))
        rows = [{"r": r, "sphere": s, "ball": B.size(r)} for r, s in enumerate(B.sphere_sizes())]
        _out(cfg, emit_plot_data(rows))
        return 0
    patch = build_patch(cfg.radius, env_int("WISERD_MAX_VERTICES", 3_000_000))
    _out(cfg, patch.to_json() + "\n")
    return 0


def cmd_link_audit(cfg: RunConfig) -> int:
    v = link_audit()
    _out(cfg, _dumps({"schema": SCHEMA, "verdicts": v}))
    return _exit_for(v)


def _points(cfg: RunConfig, n: int):
    from .development import Development
    from .geometry import vertex_point

    if len(cfg.words) != n:
        raise ConfigError(f"expected {n} words, got {len(cfg.words)}")
    dev = Development()
    return [vertex_point(dev.locate(w)) for w in cfg.words]


def cmd_envelope(cfg: RunConfig) -> int:
    from . import envelope_engine as ee

    if len(cfg.words) == 1:
        cfg.words = [""] + cfg.words
    p, q = _points(cfg, 2)
    g = ee.geodesic(p, q)
    env = ee.saturated_reduced(g) if cfg.saturated else ee.reduced(g)
    data = {"schema": SCHEMA, "from": cfg.words[0], "to": cfg.words[1],
            "length": g.length, "bands_met": len(g.bands), "envelope": env.summary(),
            "vertices": len(ee.envelope_vertices(env)) if not cfg.saturated else None}
    _out(cfg, _dumps(data))
    return 0


def cmd_triangle_reduce(cfg: RunConfig) -> int:
    from . import envelope_engine as ee

    if len(cfg.words) == 2:
        cfg.words = [""] + cfg.words
    A, B, C = _points(cfg, 3)
    res = ee.triangle_reduce(A, B, C)
    data = {"schema": SCHEMA, "words": cfg.words, "outcome": type(res).__name__}
    if isinstance(res, ee.TripleIntersection):
        w = res.witness
        data["witness"] = {"band": w.band, "x": w.x, "y": w.y, "vertex": w.is_vertex()}
    else:
        data["corners"] = [list(c) for c in res.corners]
        data["area"] = res.area
    if cfg.saturated:
        ee.triangle_reduce_saturated(A, B, C)
        data["saturated_witness"] = True
    _out(cfg, _dumps(data))
    return 0


def cmd_branching_audit(cfg: RunConfig) -> int:
    rng = random.Random(cfg.seed)
    v = {"branching": branching_check(cfg.samples, rng, cfg.rmax)}
    _out(cfg, _dumps({"schema": SCHEMA, "verdicts": v}))
    return _exit_for(v)


def cmd_rd_scan(cfg: RunConfig) -> int:
    res = rd_check(cfg.rmax, max(cfg.cap, cfg.rmax))
    if cfg.fmt == "csv":
        _out(cfg, emit_plot_data(res["rows"]))
    else:
        _out(cfg, _dumps({"schema": SCHEMA, "verdicts": {"rd_scan": res}}))
    return 0 if res["status"] == "pass" else 1


def build_report(cfg: RunConfig) -> dict:
    import networkx
    import numpy
    import scipy
    import shapely

    rng = random.Random(cfg.seed)
    verdicts = {}
    verdicts.update(link_audit())
    verdicts["ball_consistency"] = ball_check(cfg.radius, cfg.samples, rng, cfg.area_constant)
    verdicts["chromosomes"] = chromosome_check(cfg.radius + 2)
    verdicts["triangles"] = triangle_check(cfg.samples, rng)
    verdicts["branching"] = branching_check(cfg.samples, rng, cfg.rmax)
    verdicts["rd_scan"] = rd_check(cfg.rmax, max(cfg.cap, cfg.rmax))
    return {
        "schema": SCHEMA,
        "provenance": {
            "config_hash": cfg.digest(),
            "seed": cfg.seed,
            "versions": {"wiserd": __version__, "python": platform.python_version(),
                         "numpy": numpy.__version__, "scipy": scipy.__version__,
                         "shapely": shapely.__version__, "networkx": networkx.__version__},
        },
        "verdicts": verdicts,
    }


def cmd_report(cfg: RunConfig) -> int:
    rep = build_report(cfg)
    _out(cfg, _dumps(rep))
    return _exit_for(rep["verdicts"])


COMMANDS = {
    "build-ball": cmd_build_ball,
    "link-audit": cmd_link_audit,
    "envelope": cmd_envelope,
    "triangle-reduce": cmd_triangle_reduce,
    "branching-audit": cmd_branching_audit,
    "rd-scan": cmd_rd_scan,
    "report": cmd_report,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wiserd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--radius", type=int, default=2)
        s.add_argument("--samples", type=int, default=20)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--area-constant", type=int, default=16)
        s.add_argument("--subdivision", type=int, default=8)
        s.add_argument("--rmax", type=int, default=3)
        s.add_argument("--cap", type=int, default=5)
        s.add_argument("--saturated", action="store_true")
        s.add_argument("--format", dest="fmt", default="json")
        s.add_argument("--out")
        s.add_argument("words", nargs="*")
    return p


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (LemmaViolation, RetractFailure) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except WiserdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    ns = make_parser().parse_args(argv)
    from .words import parse_word
    try:
        words = [parse_word(w) for w in ns.words]
    except (ValueError, WiserdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg = RunConfig(ns.command, ns.radius, ns.samples, ns.seed, ns.area_constant, ns.subdivision,
                    ns.rmax, ns.cap, words, ns.saturated, ns.out, ns.fmt)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
