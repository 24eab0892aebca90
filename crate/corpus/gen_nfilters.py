#!/usr/bin/env python3
"""Generate the nFilters benchmark: a loop of n second-order digital
filters with a single boolean register breaking the cycle.

Usage: gen_nfilters.py N > nfilters_N.lus
"""
import sys

FILTER = """\
node Filter (in1 : bool; in2 : real)
returns (out1 : bool; out2 : real);
(*@contract
  assume in1;
  assume -1.0 <= in2 and in2 <= 1.0;
  guarantee out1;
  guarantee -1.0 <= out2 and out2 <= 1.0;
*)
var sum, D1, D2 : real;
let
  out1 = in1;
  sum = 0.0582 * (if in1 then in2 else -in2) - (-1.49 * D1) - 0.881 * D2;
  D1 = 0.0 -> pre sum;
  D2 = 0.0 -> pre D1;
  out2 = (sum - D2) / 1.25;
tel
"""


def toplevel(n: int) -> str:
    bools = ", ".join(f"b{i}" for i in range(1, n + 1))
    reals = ", ".join(f"s{i}" for i in range(1, n))
    lines = [
        "node Toplevel (in : real) returns (out : real);",
        "(*@contract",
        "  assume -1.0 <= in and in <= 1.0;",
        "  guarantee -1.0 <= out and out <= 1.0;",
        "*)",
        f"var {bools}, pre_b1 : bool;" if n >= 1 else "",
    ]
    if n > 1:
        lines[-1] = f"var {bools}, pre_b1 : bool; {reals} : real;"
    lines.append("let")
    lines.append(f"  b1, s1 = Filter(b{n}, in);")
    lines.append("  pre_b1 = true -> pre b1;")
    for i in range(2, n + 1):
        src = "pre_b1" if i == 2 else f"b{i - 1}"
        dst = "out" if i == n else f"s{i}"
        lines.append(f"  b{i}, {dst} = Filter({src}, s{i - 1});")
    lines.append("tel")
    return "\n".join(lines) + "\n"


def main() -> None:
    n = int(sys.argv[1])
    if n < 2:
        raise SystemExit("need n >= 2")
    sys.stdout.write(FILTER + "\n" + toplevel(n))


if __name__ == "__main__":
    main()
