"""Coverage-guided generation of executable API-call programs, with oracles,
metrics, instruction translation and an evaluation harness."""

from .corpus import CampaignConfig, CorpusEntry, load_corpus, run_campaign, save_corpus
from .coverage import FrequencyRecorder, PairTransition
from .engine import EngineConfig, generate_trace, select_transition
from .harness import EvalVerdict, evaluate, parse_candidate, pass_at_1
from .oracle import OracleRecord, capture_oracle, execute
from .program import Program, build_program, render_source
from .scenarios import SCENARIO_NAMES, get_scenario
from .translation import MockClient, ScriptedClient, parse_verdict, translate

__version__ = "0.1.0"
