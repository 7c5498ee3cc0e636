"""Masked-LM candidate server.

Given a word sequence and mask positions, returns top-k whole-word
candidates with scores over a small HTTP protocol (POST /predict,
GET /health). Two backends: a deterministic bigram model trained from a
transcript file, and a transformers fill-mask model.
"""

from .app import create_app
from .backends import BigramBackend

__version__ = "0.1.0"
