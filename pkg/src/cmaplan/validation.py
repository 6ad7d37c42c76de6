"""Report-style validation results."""

from __future__ import annotations

from dataclasses import dataclass, field

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    severity: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.where}: {self.message}"


@dataclass
class Report:
    """Ordered collection of validation issues."""

    issues: list[Issue] = field(default_factory=list)

    def error(self, where: str, message: str) -> None:
        self.issues.append(Issue(ERROR, where, message))

    def warn(self, where: str, message: str) -> None:
        self.issues.append(Issue(WARNING, where, message))

    def extend(self, other: "Report", prefix: str = "") -> None:
        for issue in other.issues:
            where = f"{prefix}{issue.where}" if prefix else issue.where
            self.issues.append(Issue(issue.severity, where, issue.message))

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == ERROR]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.issues)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {"severity": i.severity, "where": i.where, "message": i.message}
                for i in self.issues
            ],
        }

    def __str__(self) -> str:
        return "\n".join(str(i) for i in self.issues) or "ok"
