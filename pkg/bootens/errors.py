class BootensError(RuntimeError):
    pass


class ConfigError(BootensError):
    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"Invalid configuration `{key}`: {message}")


class DatasetError(BootensError):
    pass


class TrainingDivergedError(BootensError):
    def __init__(self, epoch: int, where: str = "network") -> None:
        self.epoch = epoch
        self.where = where
        super().__init__(f"Training of {where} diverged (non-finite loss) in epoch {epoch}")


class InvariantViolation(BootensError):
    pass
