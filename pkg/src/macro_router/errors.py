"""Exception types shared across the package."""


class MacroRouterError(Exception):
    """Base class for all domain errors."""


class DuplicateNameError(MacroRouterError):
    def __init__(self, macro_name: str):
        super().__init__(f"macro_name already registered: {macro_name}")
        self.macro_name = macro_name


class InvalidTemplateError(MacroRouterError):
    def __init__(self, placeholder: str, where: str):
        super().__init__(f"unbound placeholder {{{placeholder}}} in {where}")
        self.placeholder = placeholder
        self.where = where


class UnknownIdError(MacroRouterError):
    def __init__(self, macro_id):
        super().__init__(f"no macro with id {macro_id}")
        self.macro_id = macro_id


class SchemaError(MacroRouterError):
    """Persisted document does not match the registry schema."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message} (at {path})" if path else message)
        self.path = path


class EmptyCorpusError(MacroRouterError):
    pass


class EmptyCatalogError(MacroRouterError):
    pass


class OracleFailure(MacroRouterError):
    """Raised by a token-probability oracle; propagated unchanged."""


class MissingSlotError(MacroRouterError):
    def __init__(self, param: str):
        super().__init__(f"could not fill slot for parameter '{param}'")
        self.param = param


class TypeMismatchError(MacroRouterError):
    def __init__(self, param: str, raw: str):
        super().__init__(f"value for '{param}' is not a number: {raw!r}")
        self.param = param
        self.raw = raw


class UnboundPlaceholderError(MacroRouterError):
    def __init__(self, name: str, call_index: int):
        super().__init__(f"placeholder {{{name}}} in call {call_index} has no binding")
        self.name = name
        self.call_index = call_index


class EmptyDescriptionError(MacroRouterError):
    pass


class IllegalTransitionError(MacroRouterError):
    def __init__(self, state: str, action: str):
        super().__init__(f"cannot {action} from state {state}")
        self.state = state
        self.action = action


class FixtureError(MacroRouterError):
    pass
