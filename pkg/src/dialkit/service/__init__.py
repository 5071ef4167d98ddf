"""Reviewer-workflow service: task store, guideline checks, HTTP app."""

from .store import (
    ConflictError,
    CurationStore,
    EditSubmission,
    NotFoundError,
    RejectionError,
    RULE_BOUNDARY_INSERTION,
    RULE_NON_EMPTY_TEXT,
    RULE_PAIR_DELETION,
    StoreError,
    TaskState,
    check_submission,
    guideline_rules,
)
from .app import create_app

__all__ = [
    "ConflictError",
    "CurationStore",
    "EditSubmission",
    "NotFoundError",
    "RejectionError",
    "RULE_BOUNDARY_INSERTION",
    "RULE_NON_EMPTY_TEXT",
    "RULE_PAIR_DELETION",
    "StoreError",
    "TaskState",
    "check_submission",
    "create_app",
    "guideline_rules",
]
