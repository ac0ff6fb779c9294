"""topicbridge: diversity-aware people recommendation from topic models.

Pipeline: NDJSON corpus ingestion -> LDA user modeling -> topic-graph
intermediary discovery -> diversity-aware recommendation, plus interactive
data portraits, an HTTP serving layer with experiment instrumentation, and
a synthetic evaluation harness.
"""

__version__ = "0.1.0"
