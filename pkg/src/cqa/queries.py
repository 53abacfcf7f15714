"""Named queries used throughout the docs, demos and tests."""

from .core import ConjunctiveQuery, parse_query

Q1 = parse_query("R1(x; y) & R2(y; z)")
Q2 = parse_query("R1(x; y) & R2(y; x)")
Q3 = parse_query("R1(x; y) & R2(z; y)")
Q4 = parse_query("R(x; y, z) & R(z; x, y)")
Q5 = parse_query("R1(x; y) & S1(y, z; x)")
Q2_PATH = parse_query(
    "R(x1; x2) & X(x2; x3) & R(x3; x4) & Y(x4; x5) & R(x5; x6) & Y(x6; x7)")
Q3_PATH = parse_query(
    "R(x1; x2) & X(x2; x3) & R(x3; x4) & X(x4; x5) & "
    "R(x5; x6) & Y(x6; x7) & R(x7; x8) & Y(x8; x9)")

CATALOG: dict[str, ConjunctiveQuery] = {
    "q1": Q1,
    "q2": Q2,
    "q3": Q3,
    "q4": Q4,
    "q5": Q5,
    "q2p": Q2_PATH,
    "q3p": Q3_PATH,
}
