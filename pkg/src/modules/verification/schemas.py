# src/modules/verification/schemas.py
"""Verification module Pydantic schemas."""

from typing import List, Optional

from pydantic import BaseModel


class CheckResult(BaseModel):
    """Outcome of one check; `error` is measured in the units of `tolerance`."""

    name: str
    passed: bool
    error: float
    tolerance: float
    detail: Optional[str] = None


class VerificationReport(BaseModel):
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]
