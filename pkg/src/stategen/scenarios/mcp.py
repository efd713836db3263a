"""Text-to-speech tool suite behind a tool-calling protocol, served by a logging mock."""

from __future__ import annotations

import random

from ..model import ParamSlot, StateSchema, TransitionSpec, VarRef
from ..values import AbstractHandle
from .base import AudioNotFound, BadArgument, MockBackend, ScenarioCatalog, VoiceNotFound

VOICES = (
    {"voice_id": "v_rachel", "name": "Rachel", "description": "calm narration, american"},
    {"voice_id": "v_adam", "name": "Adam", "description": "deep and calm, american"},
    {"voice_id": "v_bella", "name": "Bella", "description": "bright and soft, british"},
    {"voice_id": "v_josh", "name": "Josh", "description": "deep news anchor"},
    {"voice_id": "v_elli", "name": "Elli", "description": "energetic and bright"},
)
QUERIES = ("calm", "deep", "bright", "american", "news")
SENTENCES = (
    "Your order has shipped.",
    "The meeting moved to three pm.",
    "Welcome back to the weekly update.",
    "Please confirm your appointment.",
    "Rain is expected this afternoon.",
    "Thank you for calling support.",
)
SOUND_PROMPTS = ("door creaking", "rain on a window", "crowd applause", "ocean waves")
PHONES = ("+1-555-0100", "+1-555-0142", "+44-20-7946-0958")
STABILITY = (0.0, 0.25, 0.5, 0.75, 1.0)
SPEEDS = (0.5, 1.0, 1.5)
DURATIONS = range(1, 6)

TEXT = "text"
VOICE = "voice_id"
PHONE = "phone"
AUDIO = "audio"
VOICE_LIST = "voice_list"
EVENT = "playback"
CALL = "call"


def search(query: str) -> list[dict]:
    q = query.lower()
    return [{"voice_id": v["voice_id"], "name": v["name"]} for v in VOICES
            if q in v["name"].lower() or q in v["description"]]


def initializer(seed: int) -> StateSchema:
    rng = random.Random(f"mcp-init:{seed}")
    schema = StateSchema(seed=seed)
    pool = SENTENCES + SOUND_PROMPTS
    for s in rng.sample(pool, rng.randint(1, 3)):
        schema.add("text", s, TEXT)
    for v in rng.sample(VOICES, rng.randint(1, 2)):
        schema.add("voice", v["voice_id"], VOICE)
    for p in rng.sample(PHONES, rng.randint(1, 2)):
        schema.add("phone", p, PHONE)
    return schema


class SearchVoices(TransitionSpec):
    name = "search_voices"
    doc = ("Search the voice library. Returns records {voice_id, name} whose name or "
           "description contains `query`.")
    params = (ParamSlot("query", "one of " + "|".join(QUERIES), "literal"),)
    returns = VOICE_LIST

    def candidates(self, schema):
        return [{}]

    def sample_literals(self, schema, b, rng):
        return {"query": rng.choice(QUERIES)}

    def effect(self, schema, b):
        schema.add("voices", search(b["query"]), VOICE_LIST)


class TextToSpeech(TransitionSpec):
    name = "text_to_speech"
    doc = ("Synthesize `text` with voice `voice`, `stability` in [0, 1] and `speed` "
           "(0.5, 1.0 or 1.5). Returns an audio record {audio_id, kind, source_text, "
           "voice, stability, speed}.")
    params = (ParamSlot("text", "text", "state"), ParamSlot("voice", "voice id", "state"),
              ParamSlot("stability", "float in [0, 1]", "literal"),
              ParamSlot("speed", "0.5|1.0|1.5", "literal"))
    returns = AUDIO

    def candidates(self, schema):
        return [{"text": VarRef(t.id), "voice": VarRef(v.id)}
                for t in schema.live(TEXT) for v in schema.live(VOICE)]

    def sample_literals(self, schema, b, rng):
        return {"stability": rng.choice(STABILITY), "speed": rng.choice(SPEEDS)}

    def effect(self, schema, b):
        schema.add("audio", {
            "audio_id": AbstractHandle("audio", schema.next_ordinal("audio")),
            "kind": "speech",
            "source_text": schema[b["text"].id].value,
            "voice": schema[b["voice"].id].value,
            "stability": b["stability"],
            "speed": b["speed"],
        }, AUDIO)


def transcribe(audio: dict) -> str:
    if audio["kind"] == "speech":
        return audio["source_text"]
    return f"[sound effect] {audio['source_text']}"


class SpeechToText(TransitionSpec):
    name = "speech_to_text"
    doc = ("Transcribe an audio record. Speech returns its spoken text; a sound effect "
           "returns '[sound effect] <prompt>'.")
    params = (ParamSlot("audio", "audio record", "state"),)
    returns = TEXT

    def candidates(self, schema):
        return [{"audio": VarRef(a.id)} for a in schema.live(AUDIO)]

    def effect(self, schema, b):
        schema.add("text", transcribe(schema[b["audio"].id].value), TEXT)


class TextToSoundEffects(TransitionSpec):
    name = "text_to_sound_effects"
    doc = ("Generate a sound effect described by `text` lasting `duration_seconds` "
           "(1..5). Returns an audio record {audio_id, kind, source_text, duration}.")
    params = (ParamSlot("text", "text", "state"),
              ParamSlot("duration_seconds", "int in 1..5", "literal"))
    returns = AUDIO

    def candidates(self, schema):
        return [{"text": VarRef(t.id)} for t in schema.live(TEXT)]

    def sample_literals(self, schema, b, rng):
        return {"duration_seconds": rng.choice(DURATIONS)}

    def effect(self, schema, b):
        schema.add("audio", {
            "audio_id": AbstractHandle("audio", schema.next_ordinal("audio")),
            "kind": "sfx",
            "source_text": schema[b["text"].id].value,
            "duration": b["duration_seconds"],
        }, AUDIO)


class PlayAudio(TransitionSpec):
    name = "play_audio"
    doc = "Play an audio record. Returns a playback event {event_id, audio_id}."
    params = (ParamSlot("audio", "audio record", "state"),)
    returns = EVENT

    def candidates(self, schema):
        return [{"audio": VarRef(a.id)} for a in schema.live(AUDIO)]

    def effect(self, schema, b):
        schema.add("play", {
            "event_id": AbstractHandle("play", schema.next_ordinal("play")),
            "audio_id": schema[b["audio"].id].value["audio_id"],
        }, EVENT)


class MakeOutboundCall(TransitionSpec):
    name = "make_outbound_call"
    doc = ("Call `phone` and speak `text` with voice `voice`. Returns a call record "
           "{call_id, phone, voice, audio_id} where audio_id is the synthesized message.")
    params = (ParamSlot("phone", "phone number", "state"),
              ParamSlot("voice", "voice id", "state"), ParamSlot("text", "text", "state"))
    returns = CALL

    def candidates(self, schema):
        return [{"phone": VarRef(p.id), "voice": VarRef(v.id), "text": VarRef(t.id)}
                for p in schema.live(PHONE) for v in schema.live(VOICE)
                for t in schema.live(TEXT)]

    def effect(self, schema, b):
        schema.add("call", {
            "call_id": AbstractHandle("call", schema.next_ordinal("call")),
            "phone": schema[b["phone"].id].value,
            "voice": schema[b["voice"].id].value,
            "audio_id": AbstractHandle("audio", schema.next_ordinal("audio")),
        }, CALL)


class MCPBackend(MockBackend):
    apis = ("search_voices", "text_to_speech", "speech_to_text", "text_to_sound_effects",
            "play_audio", "make_outbound_call")

    def __init__(self, seed: int):
        super().__init__(seed)
        self.audio: dict[str, dict] = {}
        self.plays: list[dict] = []
        self.calls: list[dict] = []

    @staticmethod
    def _text(name, v):
        if not isinstance(v, str) or not v:
            raise BadArgument(f"{name} must be non-empty text")
        return v

    @staticmethod
    def _voice(v):
        if not any(x["voice_id"] == v for x in VOICES):
            raise VoiceNotFound(f"voice {v!r} not found")
        return v

    def _audio(self, a):
        aid = a.get("audio_id") if isinstance(a, dict) else a
        if not isinstance(aid, str) or aid not in self.audio:
            raise AudioNotFound(f"audio {aid!r} not found")
        return self.audio[aid]

    def _store(self, record):
        aid = self.allocate("audio", "audio_{k:04d}")
        record = {"audio_id": aid, **record}
        self.audio[aid] = record
        return dict(record)

    def search_voices(self, query):
        return search(self._text("query", query))

    def text_to_speech(self, text, voice, stability=0.5, speed=1.0):
        if not isinstance(stability, (int, float)) or not 0 <= stability <= 1:
            raise BadArgument("stability must be in [0, 1]")
        if speed not in SPEEDS:
            raise BadArgument("speed must be 0.5, 1.0 or 1.5")
        return self._store({"kind": "speech", "source_text": self._text("text", text),
                            "voice": self._voice(voice), "stability": stability,
                            "speed": speed})

    def speech_to_text(self, audio):
        return transcribe(self._audio(audio))

    def text_to_sound_effects(self, text, duration_seconds=2):
        if isinstance(duration_seconds, bool) or duration_seconds not in DURATIONS:
            raise BadArgument("duration_seconds must be in 1..5")
        return self._store({"kind": "sfx", "source_text": self._text("text", text),
                            "duration": duration_seconds})

    def play_audio(self, audio):
        rec = self._audio(audio)
        event = {"event_id": self.allocate("play", "play_{k:04d}"), "audio_id": rec["audio_id"]}
        self.plays.append(event)
        return dict(event)

    def make_outbound_call(self, phone, voice, text):
        phone, text = self._text("phone", phone), self._text("text", text)
        voice = self._voice(voice)
        call_id = self.allocate("call", "call_{k:04d}")
        msg = self._store({"kind": "speech", "source_text": text, "voice": voice,
                           "stability": 0.5, "speed": 1.0})
        call = {"call_id": call_id, "phone": phone, "voice": voice,
                "audio_id": msg["audio_id"]}
        self.calls.append(call)
        return dict(call)

    def dump(self):
        return {"audio": [self.audio[k] for k in sorted(self.audio)],
                "plays": list(self.plays), "calls": list(self.calls)}


def build_mcp_scenario() -> ScenarioCatalog:
    return ScenarioCatalog(
        name="mcp",
        transitions=[SearchVoices(), TextToSpeech(), SpeechToText(), TextToSoundEffects(),
                     PlayAudio(), MakeOutboundCall()],
        initializer=initializer,
        backend_factory=MCPBackend,
        overview=("Speech tools exposed over a tool-calling protocol. Every synthesized "
                  "audio clip, playback and outbound call is logged by the service. "
                  "Voice ids: " + ", ".join(v["voice_id"] for v in VOICES) + "."),
    )
