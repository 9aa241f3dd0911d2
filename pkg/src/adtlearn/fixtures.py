"""Small machines used in examples, tests and the CLI."""

from .mealy import parse_dot

# Unlabelled edges back to "a" in the original drawing are read as clean / ✓.
COFFEE_DOT = """\
digraph coffee {
  __start [shape=none, label=""];
  __start -> a;
  a -> c [label="water / ✓"];
  a -> b [label="pod / ✓"];
  a -> f [label="button / ✗"];
  a -> a [label="clean / ✓"];
  b -> d [label="water / ✓"];
  b -> b [label="pod / ✓"];
  b -> f [label="button / ✗"];
  b -> a [label="clean / ✓"];
  c -> c [label="water / ✓"];
  c -> d2 [label="pod / ✓"];
  c -> f [label="button / ✗"];
  c -> a [label="clean / ✓"];
  d -> d [label="water / ✓"];
  d -> d [label="pod / ✓"];
  d -> e [label="button / ☕"];
  d -> a [label="clean / ✓"];
  d2 -> d2 [label="water / ✓"];
  d2 -> d2 [label="pod / ✓"];
  d2 -> e [label="button / ☕"];
  d2 -> a [label="clean / ✓"];
  e -> f [label="water / ✗"];
  e -> f [label="pod / ✗"];
  e -> f [label="button / ✗"];
  e -> a [label="clean / ✓"];
  f -> f [label="water / ✗"];
  f -> f [label="pod / ✗"];
  f -> f [label="button / ✗"];
  f -> f [label="clean / ✗"];
}
"""


def coffee_machine():
    """Seven-state coffee machine (six states after minimisation)."""
    return parse_dot(COFFEE_DOT)
