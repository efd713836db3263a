"""CRUD session service: five APIs over a store of user sessions."""

from __future__ import annotations

import copy
import random

from ..model import ParamSlot, StateSchema, TransitionSpec, VarRef
from ..values import AbstractHandle, resolve_handles
from .base import BadArgument, MockBackend, NotFound, ScenarioCatalog

SOURCES = ("portal", "mobile")
TYPES = ("main", "group")
STUDIES = ("brca_tcga", "luad_tcga", "gbm_tcga", "coadread_tcga", "prad_mskcc")
GENES = ("TP53", "KRAS", "EGFR", "BRCA1", "PIK3CA", "PTEN", "MYC", "APC")

PAYLOAD = "payload"
SESSION_ID = "session_id"
SESSION_ITEM = "session_item"
SESSION_LIST = "session_list"


def _partition(source: str, type_: str) -> str:
    return f"session/{source}/{type_}"


def _random_payload(rng: random.Random) -> dict:
    return {
        "study": rng.choice(STUDIES),
        "genes": sorted(rng.sample(GENES, rng.randint(1, 3))),
        "version": rng.randint(1, 9),
    }


def fixture(seed: int) -> dict:
    """Pre-existing sessions and local payloads derived from the program seed."""
    rng = random.Random(f"session-fixture:{seed}")
    sessions = []
    for _ in range(rng.randint(0, 3)):
        sessions.append({
            "id": f"s{rng.getrandbits(32):08x}",
            "source": rng.choice(SOURCES),
            "type": rng.choice(TYPES),
            "data": _random_payload(rng),
        })
    payloads = [_random_payload(rng) for _ in range(rng.randint(1, 3))]
    return {"sessions": sessions, "payloads": payloads}


def initializer(seed: int) -> StateSchema:
    fx = fixture(seed)
    schema = StateSchema(seed=seed)
    for p in fx["payloads"]:
        schema.add("payload", p, PAYLOAD)
    for s in fx["sessions"]:
        schema.add("session", s["id"], SESSION_ID)
        schema.add("~session", dict(s), SESSION_ITEM, remote=True)
    return schema


def _item_for(schema: StateSchema, handle_var) -> int | None:
    for v in schema.live(SESSION_ITEM, remote=True):
        if v.value["id"] == handle_var.value:
            return v.id
    return None


def _live_sessions(schema: StateSchema):
    """(handle var, remote item var id) for every session that still exists."""
    out = []
    for h in schema.live(SESSION_ID):
        item = _item_for(schema, h)
        if item is not None:
            out.append((h, item))
    return out


class CreateSession(TransitionSpec):
    name = "create_session"
    doc = ("Create a session of the given source and type holding `payload`. "
           "Returns the new session id.")
    params = (ParamSlot("source", "one of " + "|".join(SOURCES), "literal"),
              ParamSlot("type", "one of " + "|".join(TYPES), "literal"),
              ParamSlot("payload", "payload record", "state"))
    returns = SESSION_ID

    def candidates(self, schema):
        return [{"payload": VarRef(v.id)} for v in schema.live(PAYLOAD)]

    def sample_literals(self, schema, bindings, rng):
        return {"source": rng.choice(SOURCES), "type": rng.choice(TYPES)}

    def effect(self, schema, b):
        part = _partition(b["source"], b["type"])
        handle = AbstractHandle(part, schema.next_ordinal(part))
        data = copy.deepcopy(schema[b["payload"].id].value)
        schema.add("sid", handle, SESSION_ID)
        schema.add("~session", {"id": handle, "source": b["source"], "type": b["type"],
                                "data": data}, SESSION_ITEM, remote=True)


class ListSessions(TransitionSpec):
    name = "list_sessions"
    doc = ("List the sessions of one source and type, oldest first, as records "
           "{id, data}.")
    params = (ParamSlot("source", "one of " + "|".join(SOURCES), "literal"),
              ParamSlot("type", "one of " + "|".join(TYPES), "literal"))
    returns = SESSION_LIST

    def candidates(self, schema):
        return [{}]

    def sample_literals(self, schema, bindings, rng):
        return {"source": rng.choice(SOURCES), "type": rng.choice(TYPES)}

    def effect(self, schema, b):
        rows = [{"id": v.value["id"], "data": copy.deepcopy(v.value["data"])}
                for v in schema.live(SESSION_ITEM, remote=True)
                if v.value["source"] == b["source"] and v.value["type"] == b["type"]]
        schema.add("sessions", rows, SESSION_LIST)


class GetSession(TransitionSpec):
    name = "get_session"
    doc = "Fetch the payload stored in session `session`."
    params = (ParamSlot("session", "session id", "state"),)
    returns = PAYLOAD

    def candidates(self, schema):
        return [{"session": VarRef(h.id)} for h, _ in _live_sessions(schema)]

    def reads(self, schema, b):
        return [_item_for(schema, schema[b["session"].id])]

    def effect(self, schema, b):
        item = _item_for(schema, schema[b["session"].id])
        schema.add("payload", copy.deepcopy(schema[item].value["data"]), PAYLOAD)


class UpdateSession(TransitionSpec):
    name = "update_session"
    doc = "Replace the payload of session `session` with `payload`. Returns nothing."
    params = (ParamSlot("session", "session id", "state"),
              ParamSlot("payload", "payload record", "state"))

    def candidates(self, schema):
        return [{"session": VarRef(h.id), "payload": VarRef(p.id)}
                for h, _ in _live_sessions(schema) for p in schema.live(PAYLOAD)]

    def reads(self, schema, b):
        return [_item_for(schema, schema[b["session"].id]), b["payload"].id]

    def effect(self, schema, b):
        item = _item_for(schema, schema[b["session"].id])
        row = dict(schema[item].value)
        row["data"] = copy.deepcopy(schema[b["payload"].id].value)
        schema.write(item, row)


class DeleteSession(TransitionSpec):
    name = "delete_session"
    doc = "Delete session `session`. Later reads of that id fail. Returns nothing."
    params = (ParamSlot("session", "session id", "state"),)

    def candidates(self, schema):
        return [{"session": VarRef(h.id)} for h, _ in _live_sessions(schema)]

    def reads(self, schema, b):
        return [_item_for(schema, schema[b["session"].id])]

    def effect(self, schema, b):
        h = b["session"].id
        schema.kill(_item_for(schema, schema[h]))
        schema.kill(h)


class SessionBackend(MockBackend):
    apis = ("create_session", "list_sessions", "get_session", "update_session",
            "delete_session")

    def __init__(self, seed: int):
        super().__init__(seed)
        self.sessions: dict[str, dict] = {}
        for s in fixture(seed)["sessions"]:
            self.sessions[s["id"]] = {"source": s["source"], "type": s["type"],
                                      "data": copy.deepcopy(s["data"])}

    @staticmethod
    def _check_partition(source, type_):
        if source not in SOURCES:
            raise BadArgument(f"unknown source {source!r}")
        if type_ not in TYPES:
            raise BadArgument(f"unknown type {type_!r}")

    @staticmethod
    def _check_payload(payload):
        if not isinstance(payload, dict):
            raise BadArgument("payload must be a record")
        return copy.deepcopy(payload)

    def _lookup(self, session):
        if not isinstance(session, str) or session not in self.sessions:
            raise NotFound(f"session {session!r} not found")
        return self.sessions[session]

    def create_session(self, source, type, payload):
        self._check_partition(source, type)
        data = self._check_payload(payload)
        sid = self.allocate(_partition(source, type), f"{source}-{type}-{{k:04d}}")
        self.sessions[sid] = {"source": source, "type": type, "data": data}
        return sid

    def list_sessions(self, source, type):
        self._check_partition(source, type)
        return [{"id": sid, "data": copy.deepcopy(row["data"])}
                for sid, row in self.sessions.items()
                if row["source"] == source and row["type"] == type]

    def get_session(self, session):
        return copy.deepcopy(self._lookup(session)["data"])

    def update_session(self, session, payload):
        row = self._lookup(session)
        row["data"] = self._check_payload(payload)
        return None

    def delete_session(self, session):
        self._lookup(session)
        del self.sessions[session]
        return None

    def dump(self):
        return {"sessions": [dict(id=sid, **copy.deepcopy(row))
                             for sid, row in sorted(self.sessions.items())]}


def predicted_dump(schema: StateSchema, resolve: dict) -> dict:
    rows = [resolve_handles(v.value, resolve) for v in schema.live(SESSION_ITEM, remote=True)]
    return {"sessions": sorted(rows, key=lambda r: str(r["id"]))}


def build_session_scenario() -> ScenarioCatalog:
    return ScenarioCatalog(
        name="session",
        transitions=[CreateSession(), ListSessions(), GetSession(), UpdateSession(),
                     DeleteSession()],
        initializer=initializer,
        backend_factory=SessionBackend,
        overview=("A session service stores user sessions. Each session has a source "
                  f"({', '.join(SOURCES)}), a type ({', '.join(TYPES)}) and a payload "
                  "record {study, genes, version}. Session ids are strings assigned by "
                  "the service."),
        predicted_dump=predicted_dump,
    )

