"""Command-line client for the harness service.

Each subcommand reads its input files, posts their contents to the
HTTP service, and writes the returned text back to disk, so the same
binary drives an in-process service (the default) or a remote one
(``--server URL``). Subcommands compose via files only: the output of
``score`` is valid input for ``ensemble``, whose output is valid input
for ``eval``.

Exit codes: 0 success, 1 validation errors (bad flags, bad data, HTTP
4xx), 2 I/O errors (unreadable files, unreachable server), 3 internal
invariant violations (HTTP 5xx).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import httpx

from . import __version__
from .config import (
    RunConfig,
    build_run_config,
    load_config_file,
    validate_run_config,
)
from .errors import InternalCheckError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

_OVERRIDE_KEYS = (
    "task",
    "data",
    "answers",
    "corpus",
    "predictions",
    "model",
    "out",
    "labels_out",
    "json_out",
    "order",
    "alpha",
    "threshold",
    "band",
    "seed",
    "model_name",
    "method",
    "split",
)


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit 2; this harness reserves 2
    for I/O, so usage errors become validation errors instead."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValidationError(f"{self.prog}: {message}")


class ServiceClient:
    """Posts JSON payloads to the service and unwraps error envelopes.

    Without a server URL the application runs in this process behind
    an ASGI transport; no socket is opened.
    """

    def __init__(self, server: Optional[str] = None) -> None:
        self._server = server.rstrip("/") if server else None
        self._transport: Optional[httpx.ASGITransport] = None

    def post(self, path: str, payload: dict) -> dict:
        if self._server is None:
            response = self._post_local(path, payload)
        else:
            response = self._post_remote(path, payload)
        return _unwrap(response)

    def _post_local(self, path: str, payload: dict) -> httpx.Response:
        if self._transport is None:
            from .service import create_app

            self._transport = httpx.ASGITransport(app=create_app())

        async def go() -> httpx.Response:
            async with httpx.AsyncClient(
                transport=self._transport, base_url="http://harness"
            ) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())

    def _post_remote(self, path: str, payload: dict) -> httpx.Response:
        try:
            with httpx.Client(base_url=self._server, timeout=120.0) as client:
                return client.post(path, json=payload)
        except httpx.TransportError as exc:
            raise OSError(f"cannot reach server {self._server}: {exc}") from None


def _detail(response: httpx.Response) -> str:
    try:
        detail = response.json().get("detail")
    except (json.JSONDecodeError, AttributeError):
        detail = None
    if isinstance(detail, str):
        return detail
    if isinstance(detail, list):  # request-schema errors arrive as a list
        parts = []
        for item in detail:
            loc = ".".join(str(p) for p in item.get("loc", []) if p != "body")
            parts.append(f"{loc}: {item.get('msg', '')}" if loc else item.get("msg", ""))
        return "; ".join(parts)
    return response.text.strip() or f"HTTP {response.status_code}"


def _unwrap(response: httpx.Response) -> dict:
    if response.status_code >= 500:
        raise InternalCheckError(_detail(response))
    if response.status_code >= 400:
        raise ValidationError(_detail(response))
    return response.json()


def _read(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _write_json(path: Optional[Path], doc: dict) -> None:
    if path is not None:
        _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _parse_member_flag(value: str) -> dict:
    """NAME=PATH or NAME=PATH@DEVSCORE."""
    name, sep, rest = value.partition("=")
    name, rest = name.strip(), rest.strip()
    if not sep or not name or not rest:
        raise ValidationError(f"--member expects NAME=PATH[@DEVSCORE], got {value!r}")
    path, at, dev = rest.rpartition("@")
    if at:
        try:
            float(dev)
        except ValueError:
            path, dev = rest, ""
        else:
            return {"name": name, "predictions": path.strip(), "dev_score": dev.strip()}
    return {"name": name, "predictions": rest}


def _overrides(args: argparse.Namespace) -> dict:
    over = {
        key: getattr(args, key)
        for key in _OVERRIDE_KEYS
        if getattr(args, key, None) is not None
    }
    if getattr(args, "member", None):
        over["members"] = [_parse_member_flag(v) for v in args.member]
    return over


def _configure(args: argparse.Namespace, require: Sequence[str]) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else None
    config = build_run_config(file_values, _overrides(args))
    problems = validate_run_config(config, require=require, check_files=False)
    if problems:
        raise ValidationError("\n  ".join(["invalid configuration:", *problems]))
    return config


def _client(args: argparse.Namespace) -> ServiceClient:
    return ServiceClient(server=args.server)


def _fmt_balance(balance: dict) -> str:
    return " ".join(f"{k}={balance[k]}" for k in sorted(balance))


# --- subcommand handlers ----------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    config = _configure(args, require=("task", "data"))
    payload: dict = {"data_csv": _read(config.data)}
    if config.answers is not None:
        payload["answers_csv"] = _read(config.answers)
    if config.split is not None:
        payload["split"] = config.split
    doc = _client(args).post(f"/datasets/parse-{config.task.lower()}", payload)
    status = (
        f"labeled, balance {_fmt_balance(doc['label_balance'])}"
        if doc["labeled"]
        else "unlabeled"
    )
    print(
        f"task {doc['task']} {doc['split']}: {doc['n_instances']} instances ({status})"
    )
    _write_json(config.json_out, doc)
    return EXIT_OK


def _cmd_classify_types(args: argparse.Namespace) -> int:
    config = _configure(args, require=("data",))
    doc = _client(args).post(
        "/taxonomy/classify", {"data_csv": _read(config.data)}
    )
    sys.stdout.write(doc["csv"])
    dist = doc["distribution"]
    print("{" + ", ".join(f"{kind}: {dist[kind]}" for kind in sorted(dist)) + "}")
    if config.out is not None:
        _write(config.out, doc["csv"])
    _write_json(config.json_out, doc)
    return EXIT_OK


def _cmd_train_lm(args: argparse.Namespace) -> int:
    config = _configure(args, require=("corpus", "out"))
    doc = _client(args).post(
        "/lm/train",
        {
            "corpus_text": _read(config.corpus),
            "order": config.order,
            "alpha": config.alpha,
        },
    )
    _write(config.out, doc["model_json"])
    print(
        f"trained order-{doc['order']} model on {doc['n_sentences']} sentences "
        f"({doc['vocab_size']} vocabulary entries, {doc['n_contexts']} contexts) "
        f"-> {config.out}"
    )
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    config = _configure(args, require=("task", "data", "model", "out"))
    payload = {
        "model_json": _read(config.model),
        "data_csv": _read(config.data),
    }
    if config.model_name is not None:
        payload["model_name"] = config.model_name
    if config.task == "A":
        payload["method"] = config.method
        doc = _client(args).post("/score/pairs", payload)
    else:
        doc = _client(args).post("/score/options", payload)
    _write(config.out, doc["jsonl"])
    print(f"scored {doc['n']} instances -> {config.out}")
    if doc.get("n_fallback"):
        print(
            f"note: {doc['n_fallback']} pairs lack single-substitution structure; "
            "scored by whole-sentence comparison",
            file=sys.stderr,
        )
    return EXIT_OK


def _member_payloads(config: RunConfig) -> list[dict]:
    missing = [m.name for m in config.members if m.predictions is None]
    if missing:
        raise ValidationError(
            f"members missing a predictions file: {', '.join(missing)}"
        )
    return [
        {"name": m.name, "dev_score": m.dev_score, "jsonl": _read(m.predictions)}
        for m in config.members
    ]


def _cmd_ensemble(args: argparse.Namespace) -> int:
    config = _configure(
        args, require=("task", "data", "out", "labels_out", "members")
    )
    doc = _client(args).post(
        "/ensemble/run",
        {
            "task": config.task,
            "data_csv": _read(config.data),
            "members": _member_payloads(config),
            "threshold": config.threshold,
            "band": list(config.band),
        },
    )
    _write(config.out, doc["jsonl"])
    _write(config.labels_out, doc["labels_csv"])
    weights = " ".join(f"{w:.5f}" for w in doc["weights"])
    line = f"combined {len(config.members)} members (weights {weights})"
    if doc.get("n_ambiguous") is not None:
        line += f", {doc['n_ambiguous']} ambiguous"
    print(f"{line} -> {config.out}, {config.labels_out}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _configure(args, require=("task", "data", "answers", "predictions"))
    payload = {
        "task": config.task,
        "data_csv": _read(config.data),
        "answers_csv": _read(config.answers),
        "predictions_jsonl": _read(config.predictions),
        "with_types": not args.no_types,
        "threshold": config.threshold,
        "band": list(config.band),
    }
    if config.members:
        payload["members"] = _member_payloads(config)
    doc = _client(args).post("/eval/report", payload)
    sys.stdout.write(doc["text"])
    _write_json(config.json_out, doc["report"])
    return EXIT_OK


def _cmd_analyze_ambiguity(args: argparse.Namespace) -> int:
    config = _configure(args, require=("task", "data", "answers", "members"))
    if config.task != "A":
        raise ValidationError("ambiguity analysis applies to task A only")
    no_dev = [m.name for m in config.members if m.dev_score is None]
    if no_dev:
        raise ValidationError(
            f"members missing a dev_score: {', '.join(no_dev)}"
        )
    doc = _client(args).post(
        "/analysis/ambiguity",
        {
            "task": config.task,
            "data_csv": _read(config.data),
            "answers_csv": _read(config.answers),
            "members": _member_payloads(config),
            "threshold": config.threshold,
            "band": list(config.band),
        },
    )
    sys.stdout.write(doc["text"])
    _write_json(config.json_out, doc["report"])
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# --- argument wiring --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--config", type=Path, help="flat key=value config file")
    shared.add_argument("--server", help="service URL (default: run in-process)")
    shared.add_argument("--seed", help="random seed recorded for reproducibility")
    shared.add_argument(
        "--json", dest="json_out", help="write the machine-readable result here"
    )
    shared.add_argument("--threshold", help="hardening threshold (default 0.5)")
    shared.add_argument("--band", help="ambiguity band as lo,hi (default 0.4,0.6)")

    parser = _Parser(prog="comve", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    p = sub.add_parser(
        "ingest", parents=[shared], help="parse and validate a dataset"
    )
    p.add_argument("--task", choices=("A", "B"))
    p.add_argument("--data", help="data CSV path")
    p.add_argument("--answers", help="answer CSV path")
    p.add_argument("--split", help="split name to record")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser(
        "classify-types",
        parents=[shared],
        help="assign each sentence pair a structural kind",
    )
    p.add_argument("--data", help="task A data CSV path")
    p.add_argument("--out", help="also write the id,type CSV here")
    p.set_defaults(handler=_cmd_classify_types)

    p = sub.add_parser(
        "train-lm", parents=[shared], help="train the n-gram scorer on a corpus"
    )
    p.add_argument("--corpus", help="text corpus, one sentence per line")
    p.add_argument("--order", help="n-gram order (default 3)")
    p.add_argument("--alpha", help="additive smoothing constant (default 0.1)")
    p.add_argument("--out", help="model JSON output path")
    p.set_defaults(handler=_cmd_train_lm)

    p = sub.add_parser(
        "score", parents=[shared], help="emit soft predictions for a dataset"
    )
    p.add_argument("--task", choices=("A", "B"))
    p.add_argument("--data", help="data CSV path")
    p.add_argument("--model", help="trained model JSON path")
    p.add_argument(
        "--method",
        choices=("pair", "masked"),
        help="task A scoring method (default pair)",
    )
    p.add_argument("--model-name", dest="model_name", help="name stamped on outputs")
    p.add_argument("--out", help="predictions JSONL output path")
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser(
        "ensemble", parents=[shared], help="combine member predictions"
    )
    p.add_argument("--task", choices=("A", "B"))
    p.add_argument("--data", help="data CSV path")
    p.add_argument(
        "--member",
        action="append",
        metavar="NAME=PATH[@DEVSCORE]",
        help="member predictions (repeatable)",
    )
    p.add_argument("--out", help="combined predictions JSONL output path")
    p.add_argument(
        "--labels-out", dest="labels_out", help="hard-label CSV output path"
    )
    p.set_defaults(handler=_cmd_ensemble)

    p = sub.add_parser(
        "eval", parents=[shared], help="score predictions against gold labels"
    )
    p.add_argument("--task", choices=("A", "B"))
    p.add_argument("--data", help="data CSV path")
    p.add_argument("--answers", help="gold answer CSV path")
    p.add_argument("--predictions", help="predictions JSONL path")
    p.add_argument(
        "--member",
        action="append",
        metavar="NAME=PATH",
        help="extra prediction sets for the agreement figure (repeatable)",
    )
    p.add_argument(
        "--no-types",
        action="store_true",
        help="skip the per-kind accuracy breakdown",
    )
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser(
        "analyze-ambiguity",
        parents=[shared],
        help="replace ambiguous ensemble labels with each member's own",
    )
    p.add_argument("--task", choices=("A", "B"))
    p.add_argument("--data", help="data CSV path")
    p.add_argument("--answers", help="gold answer CSV path")
    p.add_argument(
        "--member",
        action="append",
        metavar="NAME=PATH@DEVSCORE",
        help="member predictions with dev score (repeatable)",
    )
    p.set_defaults(handler=_cmd_analyze_ambiguity)

    p = sub.add_parser("serve", parents=[shared], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "handler", None):
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION
    return args.handler(args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InternalCheckError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
