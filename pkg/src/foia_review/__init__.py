"""Machine-assisted sensitivity review for deliberative-process material.

Paragraph-level classification of an annotated document collection:
corpus ingestion, feature extraction, four classifiers plus a baseline,
grid-search tuning, table-style evaluation, and an interactive review
service.
"""

__version__ = "0.1.0"
