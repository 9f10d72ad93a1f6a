"""Regulatory-compliance text analysis toolkit.

Answers natural-language questions against a regulation by ranking context
spans, and checks documents against legal requirements through semantic-role
alignment, similarity-based relevance detection, concept classification and
template-rule evaluation, emitting auditable violation reports.
"""

__version__ = "0.1.0"
