from dataclasses import dataclass

import numpy as np

from .mlp import NetworkParams


@dataclass
class AdamState:
    first_moment: NetworkParams
    second_moment: NetworkParams
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @staticmethod
    def zeros(params: NetworkParams) -> "AdamState":
        return AdamState(params.zeros_like(), params.zeros_like())

    def copy(self) -> "AdamState":
        return AdamState(
            self.first_moment.copy(),
            self.second_moment.copy(),
            self.step,
            self.beta1,
            self.beta2,
            self.epsilon,
        )

    def update(self, params: NetworkParams, grad: NetworkParams, learning_rate: float):
        """Apply one ADAM step to `params` in place."""
        self.step += 1
        correction1 = 1.0 - self.beta1**self.step
        correction2 = 1.0 - self.beta2**self.step
        for p, g, m, v in zip(
            params.arrays(), grad.arrays(), self.first_moment.arrays(), self.second_moment.arrays()
        ):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.epsilon)
