"""Probing-benchmark toolchain for video-language models.

Builds positive/foiled caption pairs from video scene-graph annotations,
scores model sensitivity with relative performance gaps over retrieval
recall, and ships a numerically verified hard-negative contrastive loss.
"""

__version__ = "0.1.0"
