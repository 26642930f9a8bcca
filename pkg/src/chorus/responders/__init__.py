"""Candidate generator ensemble: registry, shared resources, factories."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from chorus.responders.base import Responder, instance_seed, last_human_text
from chorus.responders.bridge import BridgeResponder, ResponderServer, serve_responder
from chorus.responders.entities import (
    EntityResponder,
    load_entity_templates,
    parse_entity_templates,
)
from chorus.responders.facts import FactBase, FactResponder
from chorus.responders.patterns import (
    PatternEngine,
    PatternResponder,
    PatternRule,
    load_rules,
    parse_rule_lines,
)
from chorus.responders.simple_answers import (
    SimpleAnswersResponder,
    load_persona_rules,
    parse_persona_rules,
)
from chorus.responders.stubs import (
    ArticleQaResponder,
    CannedLineResponder,
    CrashingResponder,
    EchoResponder,
    HangingResponder,
    QuestionGenResponder,
    SleepyResponder,
    load_lines,
)
from chorus.responders.topic import (
    TOPIC_LABELS,
    TopicModel,
    TopicResponder,
    load_seed_corpus,
)
from chorus.text.embeddings import EmbeddingStore
from chorus.text.entities import EntityTagger, load_gazetteers
from chorus.text.lexicons import Lexicons, default_resource_dir, load_lexicons, read_lines

RESPONDER_NAMES = (
    "chitchat",
    "chitchat_brief",
    "question_gen",
    "article_qa",
    "topic",
    "fact",
    "entity",
    "simple_answers",
    "pattern",
)

# groups the selection cascade draws from
OPENER_RESPONDERS = ("question_gen", "entity")
RE_ENGAGE_RESPONDERS = ("question_gen", "fact", "entity")
FLEXIBLE_RESPONDERS = ("chitchat", "chitchat_brief", "pattern")
QUESTION_TURN_RESPONDERS = FLEXIBLE_RESPONDERS + ("article_qa",)
STATEMENT_TURN_RESPONDERS = FLEXIBLE_RESPONDERS + ("question_gen", "entity")
EXIT_RESPONDER = "fact"

DEFAULT_EMBEDDING_DIM = 300


@dataclass
class EnsembleResources:
    """Everything shared across conversations, loaded once."""

    lexicons: Lexicons
    store: EmbeddingStore
    tagger: EntityTagger
    fact_base: FactBase
    topic_model: TopicModel
    topic_templates: tuple[str, ...]
    fact_templates: tuple[str, ...]
    fact_prefixes: tuple[str, ...]
    entity_templates: tuple[tuple[str, str, str], ...]
    persona_rules: list
    pattern_rules: list[PatternRule]
    chitchat_lines: tuple[str, ...]
    chitchat_brief_lines: tuple[str, ...]
    question_forms: tuple[str, ...]
    topic_question_patterns: tuple[str, ...]


def load_resources(
    resource_dir: Optional[str | Path] = None,
    store: Optional[EmbeddingStore] = None,
    embedding_dim: int = DEFAULT_EMBEDDING_DIM,
    topic_buckets: int = 2**18,
    train_topic: bool = True,
    topic_model_path: Optional[str | Path] = None,
    seed: int = 0,
) -> EnsembleResources:
    root = Path(resource_dir) if resource_dir is not None else default_resource_dir()
    packs = root / "packs"
    lexicons = load_lexicons(root / "lexicons")
    if store is None:
        store = EmbeddingStore.hashed(dimension=embedding_dim, seed=seed)
    tagger = EntityTagger(load_gazetteers(root / "gazetteers"))
    fact_base = FactBase.load(packs / "facts.txt", store)
    if topic_model_path is not None:
        topic_model = TopicModel.load(topic_model_path)
    else:
        topic_model = TopicModel(buckets=topic_buckets, seed=seed)
        if train_topic:
            texts, labels = load_seed_corpus(packs / "topic_seed.tsv")
            topic_model.train(texts, labels, seed=seed)
    return EnsembleResources(
        lexicons=lexicons,
        store=store,
        tagger=tagger,
        fact_base=fact_base,
        topic_model=topic_model,
        topic_templates=tuple(read_lines(packs / "topic_templates.txt")),
        fact_templates=tuple(read_lines(packs / "fact_templates.txt")),
        fact_prefixes=tuple(read_lines(packs / "fact_prefixes.txt")),
        entity_templates=tuple(load_entity_templates(packs / "entity_templates.txt")),
        persona_rules=load_persona_rules(packs / "persona_rules.txt"),
        pattern_rules=load_rules(packs / "pattern_rules.txt"),
        chitchat_lines=tuple(load_lines(packs / "chitchat_lines.txt")),
        chitchat_brief_lines=tuple(load_lines(packs / "chitchat_brief_lines.txt")),
        question_forms=tuple(read_lines(packs / "question_forms.txt")),
        topic_question_patterns=tuple(read_lines(packs / "topic_questions.txt")),
    )


ResponderFactory = Callable[[str], Responder]


def responder_factories(
    resources: EnsembleResources,
    engine_seed: int = 0,
    enabled: Optional[Sequence[str]] = None,
    legacy_quote_suppression: bool = False,
) -> dict[str, ResponderFactory]:
    """One factory per registered responder; factory(conversation_id) builds
    the per-conversation instance with a stable derived seed."""
    names = RESPONDER_NAMES if enabled is None else tuple(enabled)
    unknown = set(names) - set(RESPONDER_NAMES)
    if unknown:
        raise ValueError(f"unknown responders: {sorted(unknown)}")

    def seed_for(name: str, cid: str) -> int:
        return instance_seed(engine_seed, name, cid)

    builders: dict[str, ResponderFactory] = {
        "chitchat": lambda cid: CannedLineResponder(
            "chitchat", resources.chitchat_lines, seed_for("chitchat", cid)
        ),
        "chitchat_brief": lambda cid: CannedLineResponder(
            "chitchat_brief", resources.chitchat_brief_lines, seed_for("chitchat_brief", cid)
        ),
        "question_gen": lambda cid: QuestionGenResponder(
            resources.question_forms, resources.lexicons
        ),
        "article_qa": lambda cid: ArticleQaResponder(resources.lexicons),
        "topic": lambda cid: TopicResponder(
            resources.topic_model, resources.topic_templates, seed_for("topic", cid)
        ),
        "fact": lambda cid: FactResponder(
            resources.fact_base,
            resources.fact_templates,
            resources.fact_prefixes,
            resources.lexicons,
            seed_for("fact", cid),
        ),
        "entity": lambda cid: EntityResponder(
            resources.entity_templates, resources.tagger, seed_for("entity", cid)
        ),
        "simple_answers": lambda cid: SimpleAnswersResponder(resources.persona_rules),
        "pattern": lambda cid: PatternResponder(
            resources.pattern_rules, legacy_quote_suppression
        ),
    }
    return {name: builders[name] for name in names}


__all__ = [
    "ArticleQaResponder",
    "BridgeResponder",
    "CannedLineResponder",
    "CrashingResponder",
    "EchoResponder",
    "EnsembleResources",
    "EntityResponder",
    "EntityTagger",
    "EXIT_RESPONDER",
    "FactBase",
    "FactResponder",
    "FLEXIBLE_RESPONDERS",
    "HangingResponder",
    "OPENER_RESPONDERS",
    "PatternEngine",
    "PatternResponder",
    "PatternRule",
    "QUESTION_TURN_RESPONDERS",
    "QuestionGenResponder",
    "RE_ENGAGE_RESPONDERS",
    "RESPONDER_NAMES",
    "Responder",
    "ResponderFactory",
    "ResponderServer",
    "STATEMENT_TURN_RESPONDERS",
    "SimpleAnswersResponder",
    "SleepyResponder",
    "TOPIC_LABELS",
    "TopicModel",
    "TopicResponder",
    "instance_seed",
    "last_human_text",
    "load_entity_templates",
    "load_lines",
    "load_persona_rules",
    "load_resources",
    "load_rules",
    "load_seed_corpus",
    "parse_entity_templates",
    "parse_persona_rules",
    "parse_rule_lines",
    "responder_factories",
    "serve_responder",
]
