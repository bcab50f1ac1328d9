"""Rating service: durable storage for rating sessions plus the HTTP API
the rating UI talks to.

Sessions live on disk as one directory each: pair series as JSON files, an
append-only ratings log (JSON lines), and a session manifest. Replaying the
log reconstructs the latest-wins rating state exactly.

Body models for the endpoints are declared inside the factory; string
annotations (PEP 563) would break their resolution there, so this module
deliberately skips the annotations future import.
"""

import csv
import io
import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    DuplicatePair,
    EmptySession,
    NoRatedPairs,
    ParseError,
    RatingOutOfRange,
    UnknownPair,
    UnknownSession,
)
from .metrics.scores import GRADE_THRESHOLDS
from .pipeline import LabeledDataset, LabeledPair
from .series import SeriesPair, TimeSeries

logger = logging.getLogger(__name__)

MAX_POINTS_PER_SERIES = 5000

# Four-level grade legend served to the UI so alternative tables stay
# configurable server-side.
def default_legend() -> list[dict]:
    lo, mid, hi = GRADE_THRESHOLDS
    return [
        {"rank": 1, "label": "Excellent", "criterion": f"R > {hi}"},
        {"rank": 2, "label": "Good", "criterion": f"{mid} < R <= {hi}"},
        {"rank": 3, "label": "Fair", "criterion": f"{lo} < R <= {mid}"},
        {"rank": 4, "label": "Poor", "criterion": f"R <= {lo}"},
    ]


@dataclass(frozen=True)
class RatingSession:
    """Persisted manifest of one rating campaign."""

    session_id: str
    pair_ids: tuple[str, ...]
    legend: tuple[dict, ...]
    thresholds: tuple[float, ...]
    created_at: str

    def __post_init__(self) -> None:
        assert len(set(self.pair_ids)) == len(self.pair_ids)
        assert all(0.0 < t < 1.0 for t in self.thresholds)
        assert list(self.thresholds) == sorted(self.thresholds)


def load_pair_document(doc: dict, source: str = "<inline>") -> tuple[str, SeriesPair]:
    """Parse the interchange schema {pair_id, t, measurement, simulation}."""
    try:
        pair_id = doc["pair_id"]
        t = np.asarray(doc["t"], dtype=float)
        measurement = np.asarray(doc["measurement"], dtype=float)
        simulation = np.asarray(doc["simulation"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: bad pair document ({exc})") from None
    if not isinstance(pair_id, str) or not pair_id:
        raise ParseError(f"{source}: pair_id must be a non-empty string")
    pair = SeriesPair(
        x=TimeSeries(t=t, v=simulation, name="simulation"),
        y=TimeSeries(t=t.copy(), v=measurement, name="measurement"),
    )
    return pair_id, pair


def _pair_to_document(pair_id: str, pair: SeriesPair) -> dict:
    return {
        "pair_id": pair_id,
        "t": [float(v) for v in pair.t],
        "measurement": [float(v) for v in pair.y.v],
        "simulation": [float(v) for v in pair.x.v],
    }


def decimate_indices(n: int, limit: int = MAX_POINTS_PER_SERIES) -> np.ndarray:
    """Evenly spaced index subset, always keeping both endpoints."""
    if n <= limit:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, limit).round().astype(int))


class RatingStore:
    """Filesystem-backed session store with a single serialized writer."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: dict[str, RatingSession] = {}
        self._pair_index: dict[str, str] = {}  # pair_id -> session_id
        self._reload()

    # -- startup -------------------------------------------------------------

    def _reload(self) -> None:
        for manifest_path in sorted(self.root.glob("sessions/*/session.json")):
            with open(manifest_path) as fh:
                doc = json.load(fh)
            session = RatingSession(
                session_id=doc["session_id"],
                pair_ids=tuple(doc["pair_ids"]),
                legend=tuple(doc["legend"]),
                thresholds=tuple(doc["thresholds"]),
                created_at=doc["created_at"],
            )
            self._sessions[session.session_id] = session
            for pid in session.pair_ids:
                self._pair_index[pid] = session.session_id

    # -- paths ---------------------------------------------------------------

    def _session_dir(self, session_id: str) -> Path:
        return self.root / "sessions" / session_id

    def _log_path(self, session_id: str) -> Path:
        return self._session_dir(session_id) / "ratings.jsonl"

    # -- sessions ------------------------------------------------------------

    def create_session_from_files(self, paths: list[str | Path]) -> RatingSession:
        """Create a session from pair JSON files (manifest order = input order)."""
        docs = []
        for path in paths:
            try:
                with open(path) as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise ParseError(f"{path}: {exc}") from None
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from None
            docs.append(load_pair_document(doc, source=str(path)))
        return self.create_session(docs)

    def create_session(self, pairs: list[tuple[str, SeriesPair]]) -> RatingSession:
        if not pairs:
            raise EmptySession("a session needs at least one pair")
        with self._lock:
            seen = set()
            for pid, _ in pairs:
                if pid in seen or pid in self._pair_index:
                    raise DuplicatePair(f"pair id {pid!r} already in use")
                seen.add(pid)

            session_id = f"session-{len(self._sessions) + 1:04d}"
            while session_id in self._sessions:
                session_id = f"session-{int(session_id.split('-')[1]) + 1:04d}"
            session = RatingSession(
                session_id=session_id,
                pair_ids=tuple(pid for pid, _ in pairs),
                legend=tuple(default_legend()),
                thresholds=tuple(float(t) for t in GRADE_THRESHOLDS),
                created_at=datetime.now(timezone.utc).isoformat(),
            )

            sdir = self._session_dir(session_id)
            (sdir / "pairs").mkdir(parents=True)
            for pid, pair in pairs:
                with open(sdir / "pairs" / f"{pid}.json", "w") as fh:
                    json.dump(_pair_to_document(pid, pair), fh)
                    fh.write("\n")
            with open(sdir / "session.json", "w") as fh:
                json.dump(
                    {
                        "session_id": session.session_id,
                        "pair_ids": list(session.pair_ids),
                        "legend": list(session.legend),
                        "thresholds": list(session.thresholds),
                        "created_at": session.created_at,
                    },
                    fh,
                    indent=2,
                )
                fh.write("\n")

            self._sessions[session_id] = session
            for pid, _ in pairs:
                self._pair_index[pid] = session_id
            logger.info("created %s with %d pairs", session_id, len(pairs))
            return session

    def sessions(self) -> list[RatingSession]:
        return [self._sessions[k] for k in sorted(self._sessions)]

    def get_session(self, session_id: str) -> RatingSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def session_for_pair(self, pair_id: str) -> RatingSession:
        try:
            return self._sessions[self._pair_index[pair_id]]
        except KeyError:
            raise UnknownPair(f"no pair {pair_id!r}") from None

    def load_pair(self, pair_id: str) -> SeriesPair:
        session = self.session_for_pair(pair_id)
        path = self._session_dir(session.session_id) / "pairs" / f"{pair_id}.json"
        with open(path) as fh:
            _, pair = load_pair_document(json.load(fh), source=str(path))
        return pair

    # -- ratings -------------------------------------------------------------

    def record_rating(
        self,
        pair_id: str,
        expert_id: str,
        rating: float,
        annotation: str | None = None,
    ) -> str:
        """Append one rating to the session log; returns the record id."""
        if not isinstance(expert_id, str) or not expert_id.strip():
            raise RatingOutOfRange("expert_id must be a non-empty string")
        if not isinstance(rating, (int, float)) or not 0.0 <= float(rating) <= 1.0:
            raise RatingOutOfRange(f"rating {rating} outside [0, 1]")
        session = self.session_for_pair(pair_id)
        with self._lock:
            log = self._log_path(session.session_id)
            count = 0
            if log.exists():
                with open(log) as fh:
                    count = sum(1 for _ in fh)
            record_id = f"{session.session_id}-r{count + 1:06d}"
            entry = {
                "record_id": record_id,
                "session_id": session.session_id,
                "pair_id": pair_id,
                "expert_id": expert_id,
                "rating": float(rating),
                "annotation": annotation,
                "submitted_at": datetime.now(timezone.utc).isoformat(),
            }
            with open(log, "a") as fh:
                fh.write(json.dumps(entry) + "\n")
        return record_id

    def rating_log(self, session_id: str) -> list[dict]:
        """Full append-only history, oldest first."""
        self.get_session(session_id)
        log = self._log_path(session_id)
        if not log.exists():
            return []
        with open(log) as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def latest_ratings(self, session_id: str) -> dict[tuple[str, str], float]:
        """Replay the log; the newest (pair, expert) submission wins."""
        state: dict[tuple[str, str], float] = {}
        for entry in self.rating_log(session_id):
            state[(entry["pair_id"], entry["expert_id"])] = entry["rating"]
        return state

    # -- export --------------------------------------------------------------

    def export_csv(self, session_id: str) -> str:
        """Latest-wins ratings as CSV, ordered by manifest then expert id."""
        session = self.get_session(session_id)
        state = self.latest_ratings(session_id)
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["pair_id", "expert_id", "rating"])
        for pid in session.pair_ids:
            experts = sorted(e for (p, e) in state if p == pid)
            for expert in experts:
                writer.writerow([pid, expert, repr(float(state[(pid, expert)]))])
        return buf.getvalue()

    def export_labels(self, session_id: str) -> LabeledDataset:
        """Rated pairs as a LabeledDataset; unrated pairs are skipped."""
        session = self.get_session(session_id)
        state = self.latest_ratings(session_id)
        records = []
        for pid in session.pair_ids:
            experts = sorted(e for (p, e) in state if p == pid)
            if not experts:
                logger.warning("pair %s has no ratings; excluded from export", pid)
                continue
            records.append(
                LabeledPair(
                    pair_id=pid,
                    pair=self.load_pair(pid),
                    ratings=tuple((e, state[(pid, e)]) for e in experts),
                )
            )
        if not records:
            raise NoRatedPairs(f"session {session_id} has no rated pairs")
        return LabeledDataset(records=tuple(records), provenance="collected")


def create_app(store: RatingStore, ui_dir: str | Path | None = None):
    """FastAPI application over a RatingStore.

    Kept in a factory so tests can spin up isolated stores; the import of
    FastAPI stays local so the core library works without it installed.
    """
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse, Response
    from fastapi.staticfiles import StaticFiles
    from pydantic import BaseModel

    app = FastAPI(title="valmetric rating service")

    class RatingBody(BaseModel):
        expert_id: str
        rating: float
        annotation: str | None = None

    class PairBody(BaseModel):
        pair_id: str
        t: list[float]
        measurement: list[float]
        simulation: list[float]

    class SessionBody(BaseModel):
        pairs: list[PairBody]

    @app.exception_handler(UnknownSession)
    @app.exception_handler(UnknownPair)
    async def _unknown_handler(request: Request, exc: Exception):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(DuplicatePair)
    async def _duplicate_handler(request: Request, exc: DuplicatePair):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    # everything else malformed (bad ratings, bad series, empty sessions)
    # is a 422; the specific handlers above win via the exception MRO
    @app.exception_handler(DataError)
    async def _bad_input_handler(request: Request, exc: DataError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/sessions")
    def list_sessions():
        out = []
        for session in store.sessions():
            state = store.latest_ratings(session.session_id)
            out.append(
                {
                    "session_id": session.session_id,
                    "created_at": session.created_at,
                    "n_pairs": len(session.pair_ids),
                    "n_ratings": len(state),
                }
            )
        return out

    @app.post("/api/sessions", status_code=201)
    def create_session(body: SessionBody):
        pairs = [
            load_pair_document(p.model_dump(), source=f"pairs[{i}]")
            for i, p in enumerate(body.pairs)
        ]
        session = store.create_session(pairs)
        return {"session_id": session.session_id}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get_session(session_id)
        return {
            "session_id": session.session_id,
            "created_at": session.created_at,
            "pairs": list(session.pair_ids),
            "legend": list(session.legend),
            "thresholds": list(session.thresholds),
        }

    @app.get("/api/pairs/{pair_id}/data")
    def pair_data(pair_id: str):
        pair = store.load_pair(pair_id)
        idx = decimate_indices(pair.n)
        return {
            "pair_id": pair_id,
            "t": [float(v) for v in pair.t[idx]],
            "measurement": [float(v) for v in pair.y.v[idx]],
            "simulation": [float(v) for v in pair.x.v[idx]],
        }

    @app.post("/api/pairs/{pair_id}/ratings", status_code=201)
    def post_rating(pair_id: str, body: RatingBody):
        record_id = store.record_rating(
            pair_id, body.expert_id, body.rating, body.annotation
        )
        return {"record_id": record_id}

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str):
        return PlainTextResponse(
            store.export_csv(session_id), media_type="text/csv"
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/")
        def index() -> Response:
            return PlainTextResponse(
                "valmetric rating service is running; the rating UI is not built.\n"
                "API lives under /api/.",
            )

    return app
