"""Exception types raised by the host, the loader and the harnesses."""


class ModriscvError(Exception):
    pass


class LoadError(ModriscvError):
    """A module could not be loaded or failed validation."""

    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class AbiVersionError(LoadError):
    def __init__(self, path, found: int, expected: int):
        super().__init__(path, f"ABI version mismatch: found={found}, expected={expected}")
        self.found = found
        self.expected = expected


class UnknownBuiltin(LoadError):
    def __init__(self, name: str, known):
        super().__init__(f"builtin:{name}", f"unknown builtin module (known: {', '.join(sorted(known))})")
        self.name = name


class RegistrationError(ModriscvError):
    pass


class DuplicateName(RegistrationError):
    def __init__(self, name: str):
        super().__init__(f"module {name!r} is already registered")
        self.name = name


class LetterConflict(RegistrationError):
    def __init__(self, name: str, letter: str, holder: str):
        super().__init__(f"module {name!r} claims ISA letter {letter!r} already claimed by {holder!r}")
        self.name = name
        self.letter = letter
        self.holder = holder


class OverlapError(ModriscvError):
    """More than one decoder claimed the same word in strict-overlap mode."""

    def __init__(self, word: int, claimants):
        self.word = word
        self.claimants = tuple(claimants)
        super().__init__(f"word 0x{word:08x} claimed by {', '.join(self.claimants)}")


class ModuleContractError(ModriscvError):
    """A module broke an ABI rule at run time (e.g. RETIRE_TRAP without exactly one trap)."""


class ElfError(ModriscvError):
    pass
