"""Command line entry point: generate, translate, evaluate, metrics, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import metrics
from .corpus import (CampaignConfig, Corpus, corpus_to_json, load_corpus, run_campaign,
                     save_corpus)
from .harness import EvalVerdict, evaluate, pass_at_1
from .scenarios import SCENARIO_NAMES, get_scenario
from .translation import HTTPClient, MockClient, translate_many
from .values import canonical_dumps

log = logging.getLogger("stategen")


def _config(args) -> CampaignConfig:
    base = CampaignConfig.load(args.config) if getattr(args, "config", None) else CampaignConfig()
    d = asdict(base)
    for key in ("seed", "programs", "mode", "n"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    return CampaignConfig.from_dict(d)


def _scenarios(name: str | None, default: str) -> list[str]:
    name = name or default
    return list(SCENARIO_NAMES) if name == "all" else [name]


def _client(provider: str):
    if provider == "mock":
        return MockClient()
    if provider == "http":
        return HTTPClient()
    raise SystemExit(f"unknown provider {provider!r}")


def _translate_entries(entries, provider, max_rounds, workers) -> None:
    client = _client(provider)
    docs = [get_scenario(e.scenario).documentation() for e in entries]
    transcripts = translate_many([e.program for e in entries], client, docs, max_rounds,
                                 workers)
    for e, tr in zip(entries, transcripts):
        e.transcript = tr
        e.instruction = tr.instruction
        e.flags["needs_review"] = tr.needs_review
        if tr.outcome in ("aborted", "impossible"):
            log.warning("%s: translation %s %s", e.id, tr.outcome, tr.error or "")


def cmd_generate(args) -> int:
    cfg = _config(args)
    campaigns = []
    for name in _scenarios(args.scenario, cfg.scenario):
        c = run_campaign(CampaignConfig.from_dict({**asdict(cfg), "scenario": name}))
        if cfg.translate:
            _translate_entries(c.entries, cfg.provider, cfg.max_rounds, cfg.workers)
        m = len(get_scenario(name).transitions)
        atc = metrics.adjacent_transition_coverage([e.program for e in c.entries], m)
        print(f"{name}: {len(c.entries)} programs, {len(c.skipped)} skipped, "
              f"ATC {atc:.3f}, {c.seconds:.1f}s")
        campaigns.append(c)
    save_corpus(args.out, corpus_to_json(campaigns))
    total = sum(len(c.entries) for c in campaigns)
    print(f"wrote {total} entries to {args.out}")
    return 0 if total else 1


def cmd_translate(args) -> int:
    corpus = load_corpus(args.corpus)
    if not corpus.entries:
        print("no entries")
        return 1
    _translate_entries(corpus.entries, args.provider, args.max_rounds, args.workers)
    save_corpus(args.out or args.corpus, corpus)
    outcomes = {}
    for e in corpus.entries:
        outcomes[e.transcript.outcome] = outcomes.get(e.transcript.outcome, 0) + 1
    print(", ".join(f"{k}: {v}" for k, v in sorted(outcomes.items())))
    return 0


def _read_candidates(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if "id" not in rec or "candidate" not in rec:
                raise SystemExit(f"{path}:{ln}: records need 'id' and 'candidate'")
            out[rec["id"]] = rec["candidate"]
    return out


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    entries = corpus.by_id()
    if args.reference:
        candidates = {e.id: e.source for e in corpus.entries}
    elif args.candidates:
        candidates = _read_candidates(args.candidates)
    else:
        raise SystemExit("give --candidates FILE or --reference")
    verdicts = []
    for eid in sorted(entries):
        if eid not in candidates:
            print(f"missing candidate for {eid}", file=sys.stderr)
            continue
        e = entries[eid]
        verdicts.append(evaluate(candidates[eid], get_scenario(e.scenario), e.oracle,
                                 e.seed, task_id=eid))
    for eid in sorted(set(candidates) - set(entries)):
        print(f"unknown entry id {eid}", file=sys.stderr)
    if args.out:
        with open(args.out, "w") as fh:
            for v in verdicts:
                fh.write(canonical_dumps(v.to_json()) + "\n")
    if not verdicts:
        print("no entries")
        return 1
    print(_format_pass(pass_at_1(verdicts)))
    return 0


def _format_pass(rep) -> str:
    lines = [f"pass@1 {rep.overall:.3f} over {rep.total} tasks"]
    lines += [f"  {k:<8} {v:.3f}" for k, v in rep.per_scenario.items()]
    lines.append("  failures: " + ", ".join(f"{k} {v}" for k, v in rep.classes.items()))
    return "\n".join(lines)


def _by_scenario(corpus: Corpus) -> dict[str, list]:
    out: dict[str, list] = {}
    for e in corpus.entries:
        out.setdefault(e.scenario, []).append(e)
    return out


def cmd_metrics(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    any_entries = False
    for path in args.corpus:
        corpus = load_corpus(path)
        stem = Path(path).stem
        curves, stats = {}, {}
        for name, entries in _by_scenario(corpus).items():
            any_entries = True
            m = len(get_scenario(name).transitions)
            curves[name] = metrics.coverage_curve([e.program for e in entries], m)
            stats[name] = metrics.corpus_stats(entries).to_json()
        (out / f"{stem}_curves.csv").write_text(metrics.curve_csv(curves))
        (out / f"{stem}_stats.json").write_text(canonical_dumps(stats, indent=1) + "\n")
        print(f"{stem}: wrote {stem}_curves.csv and {stem}_stats.json")
    return 0 if any_entries else 1


def cmd_report(args) -> int:
    corpus = load_corpus(args.corpus)
    if not corpus.entries:
        print("no entries")
        return 1
    header = f"{'scenario':<9} {'progs':>5} {'ATC':>6} {'calls':>6} {'depth':>6} {'bind':>6} {'review':>6}"
    print(header)
    print("-" * len(header))
    for name, entries in _by_scenario(corpus).items():
        m = len(get_scenario(name).transitions)
        s = metrics.corpus_stats(entries).summary()
        atc = metrics.adjacent_transition_coverage([e.program for e in entries], m)
        review = sum(bool(e.flags.get("needs_review")) for e in entries)
        print(f"{name:<9} {s['count']:>5} {atc:>6.3f} {s['api_call_count']:>6.2f} "
              f"{s['path_depth']:>6.2f} {s['binding_count']:>6.2f} {review:>6}")
    s = metrics.corpus_stats(corpus.entries).summary()
    print(f"{'all':<9} {s['count']:>5} {'':>6} {s['api_call_count']:>6.2f} "
          f"{s['path_depth']:>6.2f} {s['binding_count']:>6.2f}")
    if args.verdicts:
        with open(args.verdicts) as fh:
            verdicts = [EvalVerdict.from_json(json.loads(ln)) for ln in fh if ln.strip()]
        if verdicts:
            print()
            print(_format_pass(pass_at_1(verdicts)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stategen", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="run campaigns and write a corpus")
    g.add_argument("--config", help="JSON file with CampaignConfig fields")
    g.add_argument("--scenario", help=f"one of {', '.join(SCENARIO_NAMES)} or 'all'")
    g.add_argument("--seed", type=int)
    g.add_argument("--programs", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--mode", choices=["data-dependency", "adjacent", "off"])
    g.add_argument("--out", default="corpus.json")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("translate", help="fill in instructions")
    t.add_argument("corpus")
    t.add_argument("--provider", choices=["mock", "http"], default="mock")
    t.add_argument("--max-rounds", type=int, default=3)
    t.add_argument("--workers", type=int, default=4)
    t.add_argument("--out", help="defaults to rewriting the corpus in place")
    t.set_defaults(func=cmd_translate)

    e = sub.add_parser("evaluate", help="score candidate programs")
    e.add_argument("corpus")
    e.add_argument("--candidates", help="JSONL of {id, candidate}")
    e.add_argument("--reference", action="store_true",
                   help="use each entry's own source as its candidate")
    e.add_argument("--out", help="verdict JSONL")
    e.set_defaults(func=cmd_evaluate)

    m = sub.add_parser("metrics", help="stats JSON and coverage curve CSV per corpus")
    m.add_argument("corpus", nargs="+")
    m.add_argument("--out", default="metrics")
    m.set_defaults(func=cmd_metrics)

    r = sub.add_parser("report", help="plain-text summary table")
    r.add_argument("corpus")
    r.add_argument("--verdicts")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
