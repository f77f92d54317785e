import logging
import math

from .. import symbolic, utilities
from ..runner import Runner, TaskOutcome

__all__ = ("setup", "teardown", "plugin")

LOGGER = logging.getLogger(__name__)

plugin = utilities.Plugin.with_metadata(name="symbolic", category="symbolic_core")

# Word counts are tabulated up to this length (or the configured depth, if smaller).
MAX_TABULATED_LENGTH = 16


@plugin.task("entropy")
def entropy(runner: Runner) -> TaskOutcome:
    """Topological entropy of the coding and its measure of maximal entropy."""
    spec = runner.coding()
    value = symbolic.topological_entropy(spec)
    parry = symbolic.parry_measure(spec)

    rows = []
    for n in range(1, min(runner.config.depth, MAX_TABULATED_LENGTH) + 1):
        count = symbolic.word_count(spec, n)
        rows.append((n, count, math.log(count) / n))

    LOGGER.info(f"Topological entropy {value:.12g} nats on {spec.alphabet_size} symbols")
    return TaskOutcome(
        result={
            "entropy": value,
            "alphabet_size": spec.alphabet_size,
            "irreducible": spec.irreducible,
            "parry_measure": parry,
            "parry_entropy": symbolic.markov_entropy(parry),
        },
        files=[runner.write_csv("words.csv", ("n", "words", "log_words_over_n"), rows)],
    )


setup, teardown = plugin.create_extension_handlers()
