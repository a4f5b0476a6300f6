"""HTTP game service and the unified ``haarshift`` command line.

The service hosts colouring-game sessions (Player A posts moves over JSON,
the engine answers as Player B) plus stateless analysis endpoints for shift
profiles, supporting trees, and norm estimates.  Sessions are event-sourced:
every session is an append-only JSON-lines file under the data directory,
and replaying a file through the same state machine reproduces the stored
state exactly — the engine's replies are recorded, so replay never
recomputes a search.  Requests for one session are serialized by a lock;
analysis requests share nothing and run in parallel (each one is also
appended to an audit log).

The command line exposes every library operation in three groups — ``shift``
(profiles, the Semenov constant, band extraction, level selection, tree
building), ``haar`` (norm estimates, the shift-by-m trend, blocked systems,
restricted sampling on a built tree), and ``game`` (checkers, the engine,
the scripted adversary, a terminal-playable loop) — plus ``serve`` to run
the HTTP service.  Reports print as text by default, ``--json``/``--csv``
switch the format, ``--out`` writes to a file, and ``--figdir`` renders the
tabular reports as PNG figures next to the delimited output.  Exit codes:
0 on success, 1 when a check command's verdict is false, 2 on usage errors
or malformed input files.

Configuration comes from flags first, then the environment: ``PORT``,
``DATA_DIR``, ``ENGINE_CAP`` (brute-force assignment cap) and
``ENGINE_TIMEOUT_MS`` (search deadline per request).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import threading
import time
import uuid
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .colour_game import (
    DEFAULT_ENGINE_CAP,
    DEFAULT_ENGINE_TIMEOUT_S,
    STATUS_A_WINS,
    STATUS_AWAITING_A,
    STATUS_AWAITING_B,
    STATUS_B_WINS,
    STATUS_UNDECIDED,
    CapExceeded,
    ColouredCollection,
    EngineTimeout,
    GameState,
    Move,
    StrategyInapplicable,
    adversary_instance,
    apply_move_A,
    brute_force_extensions,
    check_homogeneous,
    check_previsible,
    collection_from_wire,
    collection_to_wire,
    engine_turn,
    new_game,
    player_b_extend,
    state_to_wire,
)
from .dyadic_core import DomainError, DyadicInterval, Rearrangement, make_interval
from .haar_numerics import (
    blocked_equivalence_report,
    estimate_norm,
    figiel_shift,
    figiel_trend,
    restricted_isomorphism_report,
)
from .shift_analysis import (
    Decomposition,
    ShiftSequence,
    extract_decomposition,
    n_profile,
    select_levels,
    semenov_constant,
)
from .tree_builder import build_supporting_tree, tree_report_to_wire

SEMENOV_DEPTH_CAP = 14


# ---------------------------------------------------------------------------
# Payload parsing helpers (shared by the HTTP API and the CLI)
# ---------------------------------------------------------------------------

def parse_eta(value: Any) -> Fraction:
    """Accept {"num","den"}, "p/q", or a plain integer-valued number."""
    try:
        if isinstance(value, Mapping):
            return Fraction(int(value["num"]), int(value["den"]))
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(value).limit_denominator(1 << 30)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed eta value {value!r}: {exc}") from exc
    raise DomainError(f"malformed eta value {value!r}")


def eta_wire(eta: Fraction) -> dict:
    return {"num": eta.numerator, "den": eta.denominator}


def parse_positions(items: Any, level: int) -> list[int]:
    """Accept [{"j","k"}, ...] or bare 1-based positions at the game level."""
    if not isinstance(items, (list, tuple)):
        raise DomainError("expected a list of intervals or positions")
    out = []
    for item in items:
        if isinstance(item, Mapping):
            try:
                j, k = int(item["j"]), int(item["k"])
            except (KeyError, TypeError, ValueError) as exc:
                raise DomainError(f"malformed interval {item!r}") from exc
            if j != level:
                raise DomainError(f"interval at level {j}, expected level {level}")
            out.append(k)
        else:
            out.append(int(item))
    return out


def parse_shift(value: Any) -> ShiftSequence:
    """A shift is a JSON array of integers [m_1, ..., m_J]."""
    if not isinstance(value, (list, tuple)) or not value:
        raise DomainError("a shift sequence is a non-empty JSON array of integers")
    try:
        return ShiftSequence.from_list(value)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed shift sequence: {exc}") from exc


def parse_fraction(value: Any) -> Fraction:
    try:
        if isinstance(value, Mapping):
            return Fraction(int(value["num"]), int(value["den"]))
        if isinstance(value, float):
            return Fraction(value)
        return Fraction(str(value))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed fraction {value!r}: {exc}") from exc


def _fraction_wire(q: Fraction) -> str:
    return str(q)


# ---------------------------------------------------------------------------
# Analysis report builders (single implementation for HTTP and CLI)
# ---------------------------------------------------------------------------

def shift_report(M: ShiftSequence, J: int | None = None, *,
                 semenov: bool = False) -> dict:
    """Profile, extraction, and level selection for a shift; the Semenov
    constant is exhaustive over all intervals and therefore opt-in."""
    J = M.depth if J is None else J
    profile = n_profile(M, J)
    res = extract_decomposition(M, J)
    sel = select_levels(M, J)
    out: dict[str, Any] = {
        "depth": J,
        "m": list(M.m[:J]),
        "x_mod": [_fraction_wire(M.x_mod(j)) for j in range(1, J + 1)],
        "n_profile": profile,
        "decomposition": {
            "status": res.status,
            "reason": res.reason,
            "witness_level": res.witness_level,
            "violations": list(res.violations),
            "a": ([_fraction_wire(a) for a in res.decomposition.a]
                  if res.decomposition else None),
            "jk": list(res.decomposition.jk) if res.decomposition else None,
        },
        "selection": {
            "ok": sel.ok,
            "levels": list(sel.levels),
            "selected_m": list(sel.selected_shift.m) if sel.selected_shift else None,
            "n_values": list(sel.n_values),
            "off_pattern_levels": list(sel.off_pattern_levels),
            "reason": sel.reason,
        },
    }
    if semenov:
        if J > SEMENOV_DEPTH_CAP:
            raise DomainError(
                f"the Semenov constant walks every interval of level <= depth; "
                f"depth {J} exceeds the cap {SEMENOV_DEPTH_CAP}")
        constant, witness = semenov_constant(M.as_rearrangement(J), J)
        out["semenov"] = {
            "constant": _fraction_wire(constant),
            "constant_float": float(constant),
            "witness": {"j": witness.j, "k": witness.k},
        }
    return out


def tree_report_payload(M: ShiftSequence, J: int | None = None, *,
                        a: Sequence[Fraction] | None = None,
                        jk: Sequence[int] | None = None,
                        include_members: bool = False) -> dict:
    """Build the supporting tree for a shift and return its wire summary.

    Bands come from extraction unless (a, jk) are supplied explicitly; a
    shift whose extraction is not applicable yields a refused report."""
    J = M.depth if J is None else J
    if (a is None) != (jk is None):
        raise DomainError("explicit bands need both a and jk")
    if a is not None:
        D = Decomposition(tuple(a), tuple(int(v) for v in jk))
    else:
        res = extract_decomposition(M, J)
        if res.decomposition is None:
            return {
                "status": "refused",
                "ok": False,
                "depth": J,
                "reason": f"no band structure: {res.reason}",
                "notes": [],
                "decomposition": None,
                "sigma": None,
                "pieces": [],
            }
        D = res.decomposition
    report = build_supporting_tree(M, D, J)
    return tree_report_to_wire(report, include_members=include_members)


def _parse_tau(spec: Any, J: int) -> Rearrangement:
    """A rearrangement spec: "identity", {"m": [...]}, or {"figiel": m}."""
    if spec == "identity" or spec is None:
        return Rearrangement.identity(J)
    if isinstance(spec, Mapping) and "m" in spec:
        M = parse_shift(spec["m"])
        if M.depth < J:
            raise DomainError(f"shift depth {M.depth} below requested depth {J}")
        return M.as_rearrangement(J)
    if isinstance(spec, Mapping) and "figiel" in spec:
        return figiel_shift(int(spec["figiel"]), J).as_rearrangement()
    raise DomainError(f"malformed rearrangement spec {spec!r}; expected "
                      f"\"identity\", {{\"m\": [...]}} or {{\"figiel\": m}}")


def norm_report(tau_spec: Any, p: float, J: int, *, budget: int = 400,
                seed: int = 0) -> dict:
    tau = _parse_tau(tau_spec, J)
    rep = estimate_norm(tau, float(p), int(J), int(budget), seed=int(seed))
    return {
        "p": rep.p,
        "depth": rep.depth,
        "budget": rep.budget,
        "seed": rep.seed,
        "value": rep.value,
        "evaluations": rep.evaluations,
        "witness_mean": rep.witness_mean,
        "witness_coefficients": len(rep.witness_coeffs),
    }


# ---------------------------------------------------------------------------
# Per-testing-interval diagnostics for the UI
# ---------------------------------------------------------------------------

def testing_diagnostics(state: GameState) -> list[dict]:
    """Counts and margins for every occupied testing interval of the
    coloured part of the board: total rho, per-colour rho_i, the applicable
    condition, and the exact eta * max threshold the balanced case compares
    against."""
    coloured = tuple((p, c) for p, c in state.collection.members
                     if c is not None)
    if not coloured:
        return []
    sub = ColouredCollection(state.level, state.d, state.eta, coloured)
    verdict = check_homogeneous(sub)
    rows = []
    for entry in verdict.counts:
        if entry.total == 0:
            continue
        eta_max = state.eta * max(entry.per_colour)
        rows.append({
            "j": entry.interval.j,
            "k": entry.interval.k,
            "rho": entry.total,
            "rho_i": list(entry.per_colour),
            "condition": entry.condition,
            "ok": entry.ok,
            "min_i": min(entry.per_colour),
            "max_i": max(entry.per_colour),
            "eta_max": {"num": eta_max.numerator, "den": eta_max.denominator},
        })
    return rows


# ---------------------------------------------------------------------------
# Event-sourced sessions
# ---------------------------------------------------------------------------

def apply_engine_reply(state: GameState, event: Mapping) -> GameState:
    """Apply a recorded engine reply without recomputing it.

    Replay must land on the same state the live engine produced, so the
    recorded status is cross-checked against the board it implies."""
    if state.status != STATUS_AWAITING_B:
        raise DomainError(f"log corrupt: engine reply while {state.status}")
    status = event["status"]
    if status in (STATUS_A_WINS, STATUS_UNDECIDED):
        return replace(state, status=status, detail=event.get("detail"))
    colouring = tuple((int(k), int(c)) for k, c in event["colouring"])
    extended = state.collection.add_uncoloured(state.pending).with_colours(
        dict(colouring))
    full = len(extended.members) == 1 << state.level
    expected = STATUS_B_WINS if full else STATUS_AWAITING_A
    if status != expected:
        raise DomainError(f"log corrupt: recorded status {status}, "
                          f"board implies {expected}")
    return replace(state, collection=extended, stage=state.stage + 1,
                   pending=(), status=status,
                   history=state.history + (Move("B", colouring=colouring,
                                                 method=event.get("method")),),
                   detail=None)


def replay_events(events: Sequence[Mapping]) -> GameState:
    """Rebuild a session state from its event log."""
    if not events or events[0].get("event") != "created":
        raise DomainError("log corrupt: first event must create the game")
    head = events[0]
    eta = parse_eta(head["eta"])
    colouring = {int(k): int(c) for k, c in head.get("colouring", [])}
    state = new_game(int(head["j"]), int(head["d"]), eta, colouring)
    for event in events[1:]:
        kind = event.get("event")
        if kind == "A":
            state = apply_move_A(state, [int(k) for k in event["add"]])
        elif kind == "B":
            state = apply_engine_reply(state, event)
        else:
            raise DomainError(f"log corrupt: unknown event {kind!r}")
    return state


class Session:
    def __init__(self, sid: str, state: GameState, events: list[dict]):
        self.id = sid
        self.state = state
        self.events = events
        self.lock = threading.Lock()

    @property
    def created(self) -> str | None:
        return self.events[0].get("at") if self.events else None

    @property
    def updated(self) -> str | None:
        return self.events[-1].get("at") if self.events else None


class SessionStore:
    """Games kept in memory, mirrored to one JSON-lines file per session."""

    def __init__(self, data_dir: Path):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self.rejected: dict[str, str] = {}
        self._audit_lock = threading.Lock()
        for path in sorted(self.dir.glob("*.jsonl")):
            if path.name == "analysis.jsonl":
                continue
            sid = path.stem
            try:
                events = [json.loads(line)
                          for line in path.read_text().splitlines() if line]
                self._sessions[sid] = Session(sid, replay_events(events), events)
            except (DomainError, ValueError, KeyError) as exc:
                self.rejected[sid] = str(exc)

    def _path(self, sid: str) -> Path:
        return self.dir / f"{sid}.jsonl"

    def _append(self, sid: str, *events: dict) -> None:
        with self._path(sid).open("a") as fh:
            fh.write("".join(json.dumps(ev, sort_keys=True) + "\n"
                             for ev in events))

    def create(self, j: int, d: int, eta: Fraction,
               colouring: Mapping[int, int]) -> Session:
        state = new_game(j, d, eta, dict(colouring))
        sid = uuid.uuid4().hex[:16]
        event = {"event": "created", "at": _now(), "j": j, "d": d,
                 "eta": eta_wire(eta),
                 "colouring": sorted([k, c] for k, c in colouring.items())}
        session = Session(sid, state, [event])
        with self._lock:
            self._sessions[sid] = session
        self._append(sid, event)
        return session

    def get(self, sid: str) -> Session | None:
        with self._lock:
            return self._sessions.get(sid)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)

    def record_move(self, session: Session, added: Sequence[int],
                    after_a: GameState, after_b: GameState) -> None:
        """Log A's move and the engine's recorded reply, then commit."""
        ev_a = {"event": "A", "at": _now(), "add": list(added)}
        if after_b.status in (STATUS_A_WINS, STATUS_UNDECIDED):
            ev_b = {"event": "B", "at": _now(), "status": after_b.status,
                    "detail": after_b.detail}
        else:
            last = after_b.history[-1]
            ev_b = {"event": "B", "at": _now(), "status": after_b.status,
                    "method": last.method,
                    "colouring": [[k, c] for k, c in last.colouring]}
        session.events.extend([ev_a, ev_b])
        session.state = after_b
        self._append(session.id, ev_a, ev_b)

    def audit_analysis(self, kind: str, request: Mapping, response: Mapping) -> None:
        line = json.dumps({"at": _now(), "kind": kind, "request": request,
                           "response": response}, sort_keys=True)
        with self._audit_lock:
            with (self.dir / "analysis.jsonl").open("a") as fh:
                fh.write(line + "\n")


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + "Z"


# ---------------------------------------------------------------------------
# HTTP service
# ---------------------------------------------------------------------------

def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return default if raw in (None, "") else int(raw)


def create_app(data_dir: str | Path | None = None, *,
               cap: int | None = None, timeout_ms: int | None = None):
    """Build the FastAPI application.

    Arguments beat the DATA_DIR / ENGINE_CAP / ENGINE_TIMEOUT_MS environment
    variables, which beat the built-in defaults."""
    from fastapi import Body, FastAPI, Request
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse

    data_dir = Path(data_dir or os.environ.get("DATA_DIR") or "haarshift-data")
    cap = cap if cap is not None else _env_int("ENGINE_CAP", DEFAULT_ENGINE_CAP)
    timeout_ms = (timeout_ms if timeout_ms is not None
                  else _env_int("ENGINE_TIMEOUT_MS",
                                int(DEFAULT_ENGINE_TIMEOUT_S * 1000)))
    timeout_s = timeout_ms / 1000.0

    app = FastAPI(title="haarshift service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(data_dir)
    app.state.store = store
    app.state.engine_cap = cap
    app.state.engine_timeout_s = timeout_s

    def error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"error": {"code": code, "message": message}})

    @app.exception_handler(DomainError)
    async def _domain_error(_request: Request, exc: DomainError):
        return error(422, "domain", str(exc))

    from fastapi.exceptions import RequestValidationError

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return error(422, "bad-request", str(exc.errors()))

    def _session_or_none(sid: str) -> Session | None:
        return store.get(sid)

    def _state_payload(session: Session, *, testing: bool = False) -> dict:
        payload = {"id": session.id, "state": state_to_wire(session.state),
                   "created": session.created, "updated": session.updated}
        if testing:
            payload["testing"] = testing_diagnostics(session.state)
        return payload

    @app.get("/health")
    def health():
        return {"ok": True, "sessions": len(store.ids())}

    @app.post("/games", status_code=201)
    def create_game(payload: dict = Body(...)):
        try:
            j = int(payload["j"])
            d = int(payload["d"])
        except (KeyError, TypeError, ValueError):
            raise DomainError("a game needs integer fields j and d")
        eta = parse_eta(payload.get("eta", {"num": 1, "den": 2}))
        colouring: dict[int, int] = {}
        for member in payload.get("initial", []):
            if isinstance(member, Mapping):
                if "j" in member and int(member["j"]) != j:
                    raise DomainError(f"initial member at level {member['j']}, "
                                      f"expected {j}")
                colour = member.get("colour")
                if colour is None:
                    raise DomainError("initial members must carry a colour")
                colouring[int(member["k"])] = int(colour)
            else:
                raise DomainError("initial must list {j,k,colour} members")
        session = store.create(j, d, eta, colouring)
        return _state_payload(session)

    @app.get("/games")
    def list_games():
        return {"games": store.ids()}

    @app.get("/games/{sid}")
    def get_game(sid: str):
        session = _session_or_none(sid)
        if session is None:
            return error(404, "not-found", f"no session {sid}")
        with session.lock:
            return _state_payload(session, testing=True)

    @app.post("/games/{sid}/moves")
    def post_move(sid: str, payload: dict = Body(...)):
        session = _session_or_none(sid)
        if session is None:
            return error(404, "not-found", f"no session {sid}")
        with session.lock:
            added = parse_positions(payload.get("add", []), session.state.level)
            after_a = apply_move_A(session.state, added)
            after_b = engine_turn(after_a, cap=cap, timeout_s=timeout_s)
            store.record_move(session, added, after_a, after_b)
            out = _state_payload(session, testing=True)
            if after_b.status in (STATUS_A_WINS, STATUS_UNDECIDED):
                out["reply"] = {"status": after_b.status, "detail": after_b.detail}
            else:
                last = after_b.history[-1]
                out["reply"] = {"status": after_b.status, "method": last.method,
                                "colouring": [{"j": after_b.level, "k": k,
                                               "colour": c}
                                              for k, c in last.colouring]}
            return out

    @app.get("/games/{sid}/hint")
    def hint(sid: str, add: str | None = None):
        session = _session_or_none(sid)
        if session is None:
            return error(404, "not-found", f"no session {sid}")
        with session.lock:
            state = session.state
            if state.status != STATUS_AWAITING_A:
                raise DomainError(f"hints apply while awaiting Player A, "
                                  f"status is {state.status}")
            if add:
                positions = [int(tok) for tok in add.split(",") if tok]
            else:
                have = set(state.collection.positions)
                positions = [k for k in range(1, (1 << state.level) + 1)
                             if k not in have]
            if not positions:
                raise DomainError("the board is already full")
            required = state.d ** len(positions)
            deadline = time.monotonic() + timeout_s
            try:
                options = brute_force_extensions(state.collection, positions,
                                                 cap=cap, deadline=deadline)
            except CapExceeded as exc:
                return {"undecided": True, "required": exc.required,
                        "cap": exc.cap, "positions": positions}
            except EngineTimeout as exc:
                return {"undecided": True, "required": required,
                        "cap": cap, "detail": str(exc),
                        "positions": positions}
            return {"undecided": False, "count": len(options),
                    "required": required, "cap": cap, "positions": positions}

    @app.post("/analysis/shift")
    def analysis_shift(payload: dict = Body(...)):
        M = parse_shift(payload.get("m"))
        depth = int(payload.get("depth", M.depth))
        out = shift_report(M, depth, semenov=bool(payload.get("semenov", False)))
        store.audit_analysis("shift", payload, {"status": "ok"})
        return out

    @app.post("/analysis/tree")
    def analysis_tree(payload: dict = Body(...)):
        M = parse_shift(payload.get("m"))
        depth = int(payload.get("depth", M.depth))
        a_raw, jk_raw = payload.get("a"), payload.get("jk")
        if (a_raw is None) != (jk_raw is None):
            raise DomainError("explicit bands need both a and jk")
        a = jk = None
        if a_raw is not None:
            a = [parse_fraction(v) for v in a_raw]
            jk = [int(v) for v in jk_raw]
        out = tree_report_payload(M, depth, a=a, jk=jk,
                                  include_members=bool(
                                      payload.get("include_members", False)))
        store.audit_analysis("tree", payload,
                             {"status": out["status"], "ok": out["ok"]})
        return out

    @app.post("/analysis/norm")
    def analysis_norm(payload: dict = Body(...)):
        depth = int(payload.get("depth", 8))
        out = norm_report(payload.get("tau", "identity"),
                          float(payload.get("p", 2.0)), depth,
                          budget=int(payload.get("budget", 400)),
                          seed=int(payload.get("seed", 0)))
        store.audit_analysis("norm", payload, {"value": out["value"]})
        return out

    return app


# ---------------------------------------------------------------------------
# CLI plumbing
# ---------------------------------------------------------------------------

class _UsageError(Exception):
    """Bad input from the user: malformed file, missing field, bad flag mix."""


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _UsageError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise _UsageError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _load_shift(path: str) -> ShiftSequence:
    try:
        return parse_shift(_load_json(path))
    except DomainError as exc:
        raise _UsageError(f"{path}: {exc}") from exc


def _load_collection(path: str) -> ColouredCollection:
    try:
        return collection_from_wire(_load_json(path))
    except DomainError as exc:
        raise _UsageError(f"{path}: {exc}") from exc


def _positions_arg(raw: str) -> list[int]:
    try:
        return [int(tok) for tok in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise _UsageError(f"positions must be integers: {raw!r}") from exc


def _emit(args, lines: Iterable[str], payload: Mapping, table=None) -> None:
    """Write the report: text by default, --json / --csv to stdout or --out."""
    if getattr(args, "csv", False):
        if table is None:
            raise _UsageError("this command has no tabular form; use --json")
        header, rows = table
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    elif getattr(args, "json", False):
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = "\n".join(lines) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _figure(args, render) -> None:
    """Render a PNG via matplotlib when --figdir was given."""
    figdir = getattr(args, "figdir", None)
    if not figdir:
        return
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    Path(figdir).mkdir(parents=True, exist_ok=True)
    fig = plt.figure(figsize=(7, 4.5))
    try:
        name = render(fig)
        path = Path(figdir) / name
        fig.savefig(path, dpi=150, bbox_inches="tight")
        print(f"wrote {path}")
    finally:
        plt.close(fig)


def _add_output_flags(parser: argparse.ArgumentParser, *, fig: bool = False):
    parser.add_argument("--json", action="store_true",
                        help="emit the full report as JSON")
    parser.add_argument("--csv", action="store_true",
                        help="emit the tabular part as CSV")
    parser.add_argument("--out", metavar="PATH",
                        help="write the report to a file instead of stdout")
    if fig:
        parser.add_argument("--figdir", metavar="DIR",
                            help="also render the report as a PNG figure here")


# ---------------------------------------------------------------------------
# shift subcommands
# ---------------------------------------------------------------------------

def cmd_shift_nj(args) -> int:
    M = _load_shift(args.m)
    J = args.depth or M.depth
    report = shift_report(M, J)
    lines = [f"N-profile at depth {J} for m = {report['m']}"]
    lines += [f"  j={j:>2}  N_j={n}  x_j={x}"
              for j, (n, x) in enumerate(zip(report["n_profile"],
                                             report["x_mod"]), start=1)]
    bounded = max(report["n_profile"]) if report["n_profile"] else 0
    lines.append(f"max N_j = {bounded}")
    table = (["j", "N_j", "x_j"],
             [[j + 1, n, x] for j, (n, x) in
              enumerate(zip(report["n_profile"], report["x_mod"]))])
    _emit(args, lines, report, table)

    def render(fig):
        ax = fig.subplots()
        ax.step(range(1, J + 1), report["n_profile"], where="mid")
        ax.set_xlabel("level j")
        ax.set_ylabel("N_j")
        ax.set_title(f"cell profile, depth {J}")
        ax.set_ylim(bottom=0)
        return "n_profile.png"

    _figure(args, render)
    return 0


def cmd_shift_semenov(args) -> int:
    M = _load_shift(args.m)
    J = args.depth or M.depth
    report = shift_report(M, J, semenov=True)
    sem = report["semenov"]
    lines = [f"Semenov constant at depth {J}: {sem['constant']} "
             f"({sem['constant_float']:g})",
             f"witness interval: level {sem['witness']['j']}, "
             f"position {sem['witness']['k']}"]
    table = (["constant", "float", "witness_j", "witness_k"],
             [[sem["constant"], sem["constant_float"],
               sem["witness"]["j"], sem["witness"]["k"]]])
    _emit(args, lines, report, table)
    return 0


def cmd_shift_decompose(args) -> int:
    M = _load_shift(args.m)
    J = args.depth or M.depth
    report = shift_report(M, J)
    dec = report["decomposition"]
    lines = [f"band extraction at depth {J}: {dec['status']}"]
    if dec["reason"]:
        lines.append(f"  {dec['reason']}")
    if dec["a"] is not None:
        for i, a in enumerate(dec["a"], start=1):
            lines.append(f"  band {i}: levels [{dec['jk'][i - 1]}, "
                         f"{dec['jk'][i]}), value {a}")
        if dec["a"] == []:
            lines.append("  no bands (every shift vanishes mod 1)")
    for v in dec["violations"]:
        lines.append(f"  violation: {v}")
    rows = ([[i + 1, dec["jk"][i], dec["jk"][i + 1], dec["a"][i]]
             for i in range(len(dec["a"]))] if dec["a"] else [])
    _emit(args, lines, report, (["band", "from_level", "to_level", "value"], rows))
    return 0 if dec["status"] in ("ok", "trivial") else 1


def cmd_shift_select_levels(args) -> int:
    M = _load_shift(args.m)
    J = args.depth or M.depth
    report = shift_report(M, J)
    sel = report["selection"]
    lines = [f"level selection at depth {J}: "
             f"{'ok' if sel['ok'] else 'not possible'}"]
    if sel["reason"]:
        lines.append(f"  {sel['reason']}")
    if sel["ok"]:
        lines.append(f"  selected levels: {sel['levels']}")
        lines.append(f"  restricted shift: {sel['selected_m']}")
        lines.append(f"  cell profile:     {sel['n_values']}")
        if sel["off_pattern_levels"]:
            lines.append(f"  off-pattern levels: {sel['off_pattern_levels']}")
    table = (["level", "selected", "m", "N"],
             [[j + 1, (j + 1) in sel["levels"],
               (sel["selected_m"] or [None] * J)[j], n]
              for j, n in enumerate(sel["n_values"])])
    _emit(args, lines, report, table)
    return 0 if sel["ok"] else 1


def cmd_shift_tree(args) -> int:
    M = _load_shift(args.m)
    J = args.depth or M.depth
    a = jk = None
    if args.bands:
        spec = _load_json(args.bands)
        try:
            a = [parse_fraction(v) for v in spec["a"]]
            jk = [int(v) for v in spec["jk"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise _UsageError(f"{args.bands}: band files need a and jk arrays "
                              f"({exc})") from exc
    wire = tree_report_payload(M, J, a=a, jk=jk,
                               include_members=args.include_members)
    lines = [f"supporting tree at depth {J}: {wire['status']}"
             + ("" if wire["ok"] else " (not verified)")]
    if wire.get("reason"):
        lines.append(f"  {wire['reason']}")
    for note in wire.get("notes", []):
        lines.append(f"  note: {note}")
    rows = []
    for piece in wire.get("pieces", []):
        lines.append(
            f"  {piece['key']}: {piece['members']} members, "
            f"C={piece['C']}, delta={piece['delta']}, "
            f"sizes [{piece['size_min']}, {piece['size_max']}], "
            f"{'ok' if piece['ok'] else 'FAILED'}")
        rows.append([piece["key"], piece["kind"], piece["members"],
                     piece["C"], piece["delta"], piece["size_min"],
                     piece["size_max"], piece["ok"]])
    table = (["key", "kind", "members", "C", "delta", "size_min",
              "size_max", "ok"], rows)
    _emit(args, lines, wire, table)
    return 0 if wire["ok"] else 1


# ---------------------------------------------------------------------------
# haar subcommands
# ---------------------------------------------------------------------------

def _tau_spec_from_flag(raw: str) -> Any:
    if raw == "identity":
        return "identity"
    if raw.startswith("figiel:"):
        try:
            return {"figiel": int(raw.split(":", 1)[1])}
        except ValueError as exc:
            raise _UsageError(f"malformed --tau {raw!r}") from exc
    return {"m": _load_json(raw)}


def cmd_haar_norm(args) -> int:
    report = norm_report(_tau_spec_from_flag(args.tau), args.p, args.depth,
                         budget=args.budget, seed=args.seed)
    lines = [f"||T||_{args.p:g} lower bound at depth {args.depth}: "
             f"{report['value']:.6g}",
             f"  achieved by a witness with {report['witness_coefficients']} "
             f"coefficients after {report['evaluations']} evaluations"]
    table = (["p", "depth", "budget", "seed", "value"],
             [[report["p"], report["depth"], report["budget"],
               report["seed"], report["value"]]])
    _emit(args, lines, report, table)
    return 0


def cmd_haar_blocked(args) -> int:
    spec = _load_json(args.blocks)
    try:
        H = {make_interval(int(b["index"]["j"]), int(b["index"]["k"])):
             [make_interval(int(m["j"]), int(m["k"])) for m in b["members"]]
             for b in spec}
    except (KeyError, TypeError, ValueError) as exc:
        raise _UsageError(f"{args.blocks}: blocks need index/members interval "
                          f"objects ({exc})") from exc
    depth = max(m.j for ms in H.values() for m in ms) + 1
    tau = _parse_tau(_tau_spec_from_flag(args.tau), max(depth, args.depth or 0))
    rep = blocked_equivalence_report(H, tau, args.p, trials=args.trials,
                                     seed=args.seed)
    payload = {
        "ok": rep.ok, "p": rep.p, "trials": rep.trials, "seed": rep.seed,
        "depth": rep.depth, "witness": rep.witness,
        "transformed_over_block": rep.transformed_over_block,
        "block_over_haar": rep.block_over_haar,
    }
    if rep.ok:
        lines = [f"blocked system at p={args.p:g}: hypotheses hold",
                 f"  ||T f~|| / ||f~|| within {rep.transformed_over_block}",
                 f"  ||f~|| / ||f||   within {rep.block_over_haar}"]
    else:
        lines = [f"blocked system rejected: {rep.witness}"]
    table = (["ok", "ratio_low", "ratio_high", "base_low", "base_high"],
             [[rep.ok,
               *(rep.transformed_over_block or (None, None)),
               *(rep.block_over_haar or (None, None))]])
    _emit(args, lines, payload, table)
    return 0 if rep.ok else 1


def cmd_haar_restricted(args) -> int:
    M = _load_shift(args.m)
    J = args.depth or M.depth
    res = extract_decomposition(M, J)
    if res.decomposition is None:
        raise _UsageError(f"no band structure for this shift: {res.reason}")
    report = build_supporting_tree(M, res.decomposition, J)
    if report.status == "refused":
        print(f"tree refused: {report.reason}")
        return 1
    rows = []
    payload_rows = []
    verdict_ok = True
    pieces = [p for p in report.all_pieces if len(p.members) >= args.min_members]
    if args.pieces:
        pieces = pieces[:args.pieces]
    for piece in pieces:
        rep = restricted_isomorphism_report(piece.tau, piece.members,
                                            piece.family, args.p,
                                            trials=args.trials, seed=args.seed)
        verdict_ok = verdict_ok and not rep.refused
        rows.append([piece.key, len(piece.members), rep.refused,
                     rep.ratio_min, rep.ratio_max])
        payload_rows.append({
            "key": piece.key, "members": len(piece.members),
            "refused": rep.refused, "ratio_min": rep.ratio_min,
            "ratio_max": rep.ratio_max, "grid_depth": rep.grid_depth,
        })
    payload = {"p": args.p, "trials": args.trials, "seed": args.seed,
               "depth": J, "pieces": payload_rows}
    lines = [f"restricted sampling at p={args.p:g}, {args.trials} trials"]
    for row in payload_rows:
        lines.append(
            f"  {row['key']}: {row['members']} members, "
            + ("refused (certificate failed)" if row["refused"] else
               f"ratios within [{row['ratio_min']:.4g}, {row['ratio_max']:.4g}]"))
    _emit(args, lines, payload,
          (["key", "members", "refused", "ratio_min", "ratio_max"], rows))
    return 0 if verdict_ok else 1


def cmd_haar_figiel_trend(args) -> int:
    ms = [int(tok) for tok in args.ms.replace(",", " ").split()]
    rep = figiel_trend(ms, args.p, args.depth, args.budget, args.seed)
    payload = {
        "p": rep.p, "depth": rep.depth, "budget": rep.budget, "seed": rep.seed,
        "nondecreasing": rep.nondecreasing,
        "entries": [{"m": e.m, "value": e.value} for e in rep.entries],
    }
    lines = [f"||T_m||_{args.p:g} lower bounds at depth {args.depth}"]
    lines += [f"  m={e.m:>4}  {e.value:.6f}" for e in rep.entries]
    lines.append(f"nondecreasing: {rep.nondecreasing}")
    table = (["m", "value"], [[e.m, e.value] for e in rep.entries])
    _emit(args, lines, payload, table)

    def render(fig):
        ax = fig.subplots()
        ax.plot([e.m for e in rep.entries], [e.value for e in rep.entries],
                marker="o")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("shift size m")
        ax.set_ylabel(f"achieved ratio at p={rep.p:g}")
        ax.set_title(f"norm trend under shifts, depth {rep.depth}")
        return "figiel_trend.png"

    _figure(args, render)
    return 0


# ---------------------------------------------------------------------------
# game subcommands
# ---------------------------------------------------------------------------

def cmd_game_check(args) -> int:
    collection = _load_collection(args.board)
    verdict = check_homogeneous(collection)
    payload = {
        "ok": verdict.ok, "j": verdict.level, "d": verdict.d,
        "eta": eta_wire(verdict.eta),
        "violations": [{"j": v.interval.j, "k": v.interval.k,
                        "rho": v.total, "rho_i": list(v.per_colour),
                        "condition": v.condition}
                       for v in verdict.violations],
    }
    lines = [f"homogeneous at eta={verdict.eta}: {verdict.ok}"]
    lines += [f"  violation at level {v['j']} position {v['k']}: "
              f"rho={v['rho']}, per-colour {v['rho_i']} ({v['condition']})"
              for v in payload["violations"]]
    table = (["j", "k", "rho", "condition"],
             [[v["j"], v["k"], v["rho"], v["condition"]]
              for v in payload["violations"]])
    _emit(args, lines, payload, table)
    return 0 if verdict.ok else 1


def cmd_game_previsible(args) -> int:
    collection = _load_collection(args.board)
    added = _positions_arg(args.add)
    verdict = check_previsible(added, collection, one_sided=args.one_sided)
    payload = {
        "ok": verdict.ok, "j": verdict.level, "d": verdict.d,
        "one_sided": verdict.one_sided,
        "witnesses": [{"parent": {"j": w.parent.j, "k": w.parent.k},
                       "small_half": {"j": w.small_child.j, "k": w.small_child.k},
                       "big_half": {"j": w.big_child.j, "k": w.big_child.k},
                       "rho_small": w.rho_all_small, "rho_big": w.rho_all_big,
                       "added_in_big": w.rho_added_big}
                      for w in verdict.witnesses],
    }
    lines = [f"previsible: {verdict.ok}"]
    lines += [f"  blocked at parent level {w['parent']['j']} position "
              f"{w['parent']['k']}: saturated half holds {w['rho_big']}, "
              f"other {w['rho_small']}, additions into it: {w['added_in_big']}"
              for w in payload["witnesses"]]
    table = (["parent_j", "parent_k", "rho_small", "rho_big", "added_in_big"],
             [[w["parent"]["j"], w["parent"]["k"], w["rho_small"],
               w["rho_big"], w["added_in_big"]] for w in payload["witnesses"]])
    _emit(args, lines, payload, table)
    return 0 if verdict.ok else 1


def cmd_game_extend(args) -> int:
    collection = _load_collection(args.board)
    added = _positions_arg(args.add)
    try:
        extended = player_b_extend(collection, added)
    except StrategyInapplicable as exc:
        print(f"strategy inapplicable: {exc.reason}")
        for w in exc.witnesses:
            print(f"  witness: parent level {w.parent.j} position {w.parent.k}")
        return 1
    wire = collection_to_wire(extended)
    reply = {k: extended.colour_map[k] for k in added}
    lines = [f"coloured {len(added)} additions: " +
             ", ".join(f"{k}->{c}" for k, c in sorted(reply.items()))]
    table = (["k", "colour"],
             [[k, c] for k, c in extended.members])
    _emit(args, lines, {"collection": wire, "reply": reply}, table)
    return 0


def cmd_game_oracle(args) -> int:
    collection = _load_collection(args.board)
    added = _positions_arg(args.add)
    try:
        options = brute_force_extensions(collection, added, cap=args.cap)
    except CapExceeded as exc:
        print(f"undecided: needs {exc.required} evaluations, cap is {exc.cap}")
        return 1
    payload = {
        "count": len(options),
        "required": collection.d ** len(added),
        "colourings": [[[k, c.colour_map[k]] for k in added]
                       for c in options[:args.list or 0]],
    }
    lines = [f"{len(options)} homogeneous colourings of {added} "
             f"out of {payload['required']} assignments"]
    for combo in payload["colourings"]:
        lines.append("  " + ", ".join(f"{k}->{c}" for k, c in combo))
    table = (["count", "required"], [[payload["count"], payload["required"]]])
    _emit(args, lines, payload, table)
    return 0


def cmd_game_adversary(args) -> int:
    script = adversary_instance(args.a, args.n, args.level)
    payload = {
        "a": script.a, "n": script.n, "j": script.level, "d": script.d,
        "eta": eta_wire(script.eta),
        "anchors": list(script.anchors),
        "satellites": list(script.satellites),
        "initial": state_to_wire(script.initial),
        "moves": [list(mv) for mv in script.moves],
    }
    lines = [f"adversary at level {script.level}: d={script.d}, "
             f"eta={script.eta}",
             f"  anchors (colours 2..d): {list(script.anchors)}",
             f"  satellites: {list(script.satellites)} "
             f"(last one starts coloured 1)",
             f"  script: {[list(mv) for mv in script.moves]}"]
    verified = None
    if args.verify:
        verified, report_lines = _verify_adversary(script)
        payload["verified"] = verified
        payload["stages"] = report_lines
        lines += [f"  {line}" for line in report_lines]
        lines.append(f"verified: {verified}")
    table = (["stage", "added", "forced"],
             [[i + 1, mv[0], "colour 1" if i + 1 < len(script.moves) else
               "no extension"] for i, mv in enumerate(script.moves)])
    _emit(args, lines, payload, table)
    return 0 if (verified is None or verified) else 1


def _verify_adversary(script) -> tuple[bool, list[str]]:
    """Replay the script: every stage must force colour 1 uniquely, the last
    must admit no extension at all."""
    state = script.initial
    report = []
    ok = True
    for idx, move in enumerate(script.moves):
        last = idx == len(script.moves) - 1
        options = brute_force_extensions(state.collection, move)
        if last:
            good = len(options) == 0
            report.append(f"stage {idx + 1}: add {list(move)} -> "
                          f"{len(options)} extensions (want 0)")
        else:
            forced = (len(options) == 1
                      and options[0].colour_map[move[0]] == 1)
            good = forced
            report.append(f"stage {idx + 1}: add {list(move)} -> "
                          f"{len(options)} extension(s), "
                          f"first colours {move[0]} -> "
                          f"{options[0].colour_map[move[0]] if options else '-'}"
                          f" (want unique colour 1)")
        ok = ok and good
        state = engine_turn(apply_move_A(state, move))
        if last:
            good = state.status == STATUS_A_WINS
            report.append(f"engine verdict: {state.status} (want {STATUS_A_WINS})")
            ok = ok and good
    return ok, report


def _render_board(state: GameState) -> str:
    cells = []
    cmap = state.collection.colour_map
    pending = set(state.pending)
    for k in range(1, (1 << state.level) + 1):
        if k in pending:
            cells.append("?")
        elif k in cmap:
            colour = cmap[k]
            cells.append("?" if colour is None else str(colour))
        else:
            cells.append("·")
    return "".join(cells)


def cmd_game_play(args) -> int:
    eta = parse_eta(args.eta)
    colouring: Mapping[int, int] = {}
    if args.initial:
        colouring = dict(_load_collection(args.initial).members)
        if any(c is None for c in colouring.values()):
            raise _UsageError("initial collections must be fully coloured")
    state = new_game(args.level, args.d, eta, colouring)
    print(f"game at level {args.level}: d={args.d}, eta={eta}; "
          f"positions 1..{1 << args.level}")
    interactive = sys.stdin.isatty()
    while state.status == STATUS_AWAITING_A:
        print(f"stage {state.stage:>2}  [{_render_board(state)}]  {state.status}")
        if interactive:
            sys.stdout.write("A> ")
            sys.stdout.flush()
        line = sys.stdin.readline()
        if not line or line.strip() in ("quit", "exit"):
            print("stopped")
            return 0
        if not line.strip():
            continue
        try:
            added = _positions_arg(line.strip())
            state = engine_turn(apply_move_A(state, added),
                                cap=args.cap,
                                timeout_s=args.timeout_ms / 1000.0)
        except DomainError as exc:
            print(f"rejected: {exc}")
            continue
        if state.history and state.history[-1].player == "B":
            reply = state.history[-1]
            print(f"B ({reply.method}): " +
                  ", ".join(f"{k}->{c}" for k, c in reply.colouring))
    print(f"stage {state.stage:>2}  [{_render_board(state)}]  {state.status}")
    if state.detail:
        print(state.detail)
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    app = create_app(args.data_dir, cap=args.cap, timeout_ms=args.timeout_ms)
    port = args.port if args.port is not None else _env_int("PORT", 8000)
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# Argument parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haarshift",
        description="Haar-system shift analysis, supporting trees, norm "
                    "numerics, and the interval colouring game.")
    sub = parser.add_subparsers(dest="group", required=True)

    # shift ------------------------------------------------------------
    shift = sub.add_parser("shift", help="shift-sequence analysis")
    shift_sub = shift.add_subparsers(dest="command", required=True)

    p = shift_sub.add_parser("nj", help="cell profile N_j per level")
    p.add_argument("--m", required=True, help="JSON file: [m_1, ..., m_J]")
    p.add_argument("--depth", type=int)
    _add_output_flags(p, fig=True)
    p.set_defaults(fn=cmd_shift_nj)

    p = shift_sub.add_parser("semenov", help="exhaustive Semenov constant")
    p.add_argument("--m", required=True)
    p.add_argument("--depth", type=int)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_shift_semenov)

    p = shift_sub.add_parser("decompose", help="extract the band structure")
    p.add_argument("--m", required=True)
    p.add_argument("--depth", type=int)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_shift_decompose)

    p = shift_sub.add_parser("select-levels",
                             help="restrict to a sparse two-cell level set")
    p.add_argument("--m", required=True)
    p.add_argument("--depth", type=int)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_shift_select_levels)

    p = shift_sub.add_parser("tree", help="build and verify a supporting tree")
    p.add_argument("--m", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--bands", help="JSON file {a: [...], jk: [...]} to "
                                   "override band extraction")
    p.add_argument("--include-members", action="store_true",
                   help="include every member's set in the JSON report")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_shift_tree)

    # haar -------------------------------------------------------------
    haar = sub.add_parser("haar", help="Haar-coefficient numerics")
    haar_sub = haar.add_subparsers(dest="command", required=True)

    p = haar_sub.add_parser("norm", help="lower-bound a rearrangement norm")
    p.add_argument("--tau", default="identity",
                   help='"identity", "figiel:<m>", or a shift JSON file')
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_haar_norm)

    p = haar_sub.add_parser("blocked", help="blocked-system equivalence report")
    p.add_argument("--blocks", required=True,
                   help="JSON file: [{index: {j,k}, members: [{j,k}, ...]}]")
    p.add_argument("--tau", default="identity")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--depth", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_haar_blocked)

    p = haar_sub.add_parser("restricted",
                            help="sample norm ratios on a built tree's pieces")
    p.add_argument("--m", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pieces", type=int, default=0,
                   help="report only the first N pieces (0 = all)")
    p.add_argument("--min-members", type=int, default=1)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_haar_restricted)

    p = haar_sub.add_parser("figiel-trend",
                            help="norm trend across shift sizes m")
    p.add_argument("--ms", default="1,2,4,8,16")
    p.add_argument("--p", type=float, default=4.0)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--budget", type=int, default=300)
    p.add_argument("--seed", type=int, default=7)
    _add_output_flags(p, fig=True)
    p.set_defaults(fn=cmd_haar_figiel_trend)

    # game ---------------------------------------------------------------
    game = sub.add_parser("game", help="the interval colouring game")
    game_sub = game.add_subparsers(dest="command", required=True)

    p = game_sub.add_parser("check", help="exact homogeneity check")
    p.add_argument("--board", required=True,
                   help="JSON file: {j, d, eta: {num,den}, members: "
                        "[{j,k,colour}]}")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_game_check)

    p = game_sub.add_parser("previsible", help="previsibility of additions")
    p.add_argument("--board", required=True)
    p.add_argument("--add", required=True, help="positions, e.g. 3,5,12")
    p.add_argument("--one-sided", action="store_true")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_game_previsible)

    p = game_sub.add_parser("extend", help="colour additions with B's strategy")
    p.add_argument("--board", required=True)
    p.add_argument("--add", required=True)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_game_extend)

    p = game_sub.add_parser("oracle", help="count homogeneous colourings")
    p.add_argument("--board", required=True)
    p.add_argument("--add", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_ENGINE_CAP)
    p.add_argument("--list", type=int, default=0,
                   help="also print the first N colourings")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_game_oracle)

    p = game_sub.add_parser("adversary",
                            help="scripted position where Player A wins")
    p.add_argument("-a", type=int, required=True, help="colour exponent: d = 2^a")
    p.add_argument("-n", type=int, required=True, help="eta = 1/n")
    p.add_argument("-j", "--level", type=int, required=True)
    p.add_argument("--verify", action="store_true",
                   help="replay the script and confirm the forced pattern")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_game_adversary)

    p = game_sub.add_parser("play", help="play Player A in the terminal")
    p.add_argument("-j", "--level", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--eta", default="1/2")
    p.add_argument("--initial", help="JSON collection file to start from")
    p.add_argument("--cap", type=int, default=DEFAULT_ENGINE_CAP)
    p.add_argument("--timeout-ms", type=int,
                   default=int(DEFAULT_ENGINE_TIMEOUT_S * 1000))
    p.set_defaults(fn=cmd_game_play)

    # serve --------------------------------------------------------------
    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None,
                   help="default: the PORT environment variable, then 8000")
    p.add_argument("--data-dir", default=None,
                   help="default: the DATA_DIR environment variable")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--timeout-ms", type=int, default=None)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
