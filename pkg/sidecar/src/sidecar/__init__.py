"""Batch NLP sidecar: produces the file artifacts the main toolkit ingests.

Four commands (annotate, embed, score, answer) write tab-separated files in
the documented interchange formats. Integration is file-based only: the
main toolkit never imports or shells out to this package at runtime.

The ``builtin-*`` model identifiers are self-contained deterministic
implementations so the pipeline runs without downloaded model weights.
Identifiers prefixed ``stanza:`` or ``hf:`` delegate to those toolkits when
installed and fail with a remediation hint when they are not.
"""

__version__ = "0.1.0"
