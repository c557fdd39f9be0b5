"""Error types shared across the toolkit. All derive from ValueError."""


class CorpusParseError(ValueError):
    def __init__(self, message, line=None, dialog_index=None):
        self.line = line
        self.dialog_index = dialog_index
        if line is not None:
            message = f"line {line}: {message}"
        elif dialog_index is not None:
            message = f"dialog {dialog_index}: {message}"
        super().__init__(message)


class AlignmentError(ValueError):
    pass


class AnchorError(ValueError):
    pass


class PhraseBankError(ValueError):
    pass


class PlanError(ValueError):
    pass


class PlanShortfallError(PlanError):
    def __init__(self, shortfalls):
        # shortfalls: list of (pattern name, target, eligible)
        self.shortfalls = list(shortfalls)
        lines = [f"{name}: eligible {eligible} < target {target}" for name, target, eligible in self.shortfalls]
        super().__init__("eligibility shortfall\n" + "\n".join(lines))
