"""Regenerates the bundled desk-scale corpora under src/hintgen/data/corpus/.

Run from the repo root: python3 tools/build_bundled_corpus.py
Every reference solution and bug here is exercised by tests/test_corpus.py
(solutions must pass their suites, bugs must fail at least one case).
"""

from __future__ import annotations

import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hintgen.corpus import (  # noqa: E402
    BOOLEAN,
    BuggyProgram,
    Corpus,
    Difficulty,
    Origin,
    Split,
    Task,
    TestCase,
    TestSuite,
    serialize_corpus,
)

OUT_ROOT = Path(__file__).resolve().parents[1] / "src" / "hintgen" / "data" / "corpus"


def cases(*rows, timeout_ms=5000, compare=None):
    out = []
    for i, (args, expected) in enumerate(rows, start=1):
        kwargs = {"compare_mode": compare} if compare else {}
        out.append(
            TestCase(id=f"c{i}", args=tuple(args), expected=expected, timeout_ms=timeout_ms, **kwargs)
        )
    return TestSuite(tuple(out))


KAREL_PRELUDE = '''\
class linklist:
    """1-D list wrapper with a movable pointer, starting at the first element."""

    def __init__(self, values):
        self._values = list(values)
        self._pos = 0

    def go_next(self):
        if self._pos + 1 >= len(self._values):
            raise IndexError("no next element")
        self._pos += 1

    def go_prev(self):
        if self._pos <= 0:
            raise IndexError("no previous element")
        self._pos -= 1

    def get_value(self):
        return self._values[self._pos]

    def set_value(self, value):
        self._values[self._pos] = value

    def has_next(self):
        return self._pos + 1 < len(self._values)

    def has_prev(self):
        return self._pos > 0


def __adapt_args__(args):
    return [linklist(a) if isinstance(a, list) else a for a in args]
'''

KAREL_OPS_NOTE = (
    "The linklist supports exactly these operations: a.go_next(), a.go_prev(), "
    "a.get_value(), a.set_value(v), a.has_next(), a.has_prev(). "
    "The pointer starts at the first element. Index access and len() are not available."
)


def intro_basics() -> Corpus:
    tasks = [
        Task(
            id="duplicate-elimination",
            title="DuplicateElimination",
            description=(
                "Write a function remove_extras(lst) that returns a new list in "
                "which only the first occurrence of each element is kept. The "
                "relative order of the surviving elements must not change. "
                "Example: remove_extras([5, 2, 1, 2, 3]) returns [5, 2, 1, 3]."
            ),
            entry_function="remove_extras",
            difficulty=Difficulty.EASY,
            solution=(
                "def remove_extras(lst):\n"
                "    result = []\n"
                "    for x in lst:\n"
                "        if x not in result:\n"
                "            result.append(x)\n"
                "    return result\n"
            ),
            suite=cases(
                ([[5, 2, 1, 2, 3]], [5, 2, 1, 3]),
                ([[]], []),
                ([[1, 1, 1]], [1]),
                ([[3, 3, 2, 1]], [3, 2, 1]),
                ([[1, 2, 3]], [1, 2, 3]),
                ([["a", "b", "a"]], ["a", "b"]),
            ),
        ),
        Task(
            id="sorting-tuples",
            title="SortingTuples",
            description=(
                "Write a function sort_pairs(pairs) where pairs is a list of "
                "[name, score] pairs. Return the pairs sorted by score from "
                "highest to lowest. Pairs with equal scores keep their original "
                "relative order."
            ),
            entry_function="sort_pairs",
            difficulty=Difficulty.EASY,
            solution=(
                "def sort_pairs(pairs):\n"
                "    return sorted(pairs, key=lambda p: p[1], reverse=True)\n"
            ),
            suite=cases(
                ([[["a", 1], ["b", 3], ["c", 2]]], [["b", 3], ["c", 2], ["a", 1]]),
                ([[["x", 2], ["y", 2], ["z", 1]]], [["x", 2], ["y", 2], ["z", 1]]),
                ([[]], []),
                ([[["solo", 7]]], [["solo", 7]]),
                ([[["p", 0], ["q", -1], ["r", 5]]], [["r", 5], ["p", 0], ["q", -1]]),
            ),
        ),
        Task(
            id="top-k",
            title="Top-k elements",
            description=(
                "Write a function top_k(lst, k) that returns the k largest "
                "elements of lst in descending order. If lst has fewer than k "
                "elements, return all of them in descending order."
            ),
            entry_function="top_k",
            difficulty=Difficulty.EASY,
            solution=(
                "def top_k(lst, k):\n"
                "    return sorted(lst, reverse=True)[:k]\n"
            ),
            suite=cases(
                ([[5, 1, 9, 7], 2], [9, 7]),
                ([[1], 1], [1]),
                ([[3, 3, 2], 2], [3, 3]),
                ([[4, 6], 5], [6, 4]),
                ([[], 0], []),
                ([[2, 8, 8, 1], 3], [8, 8, 2]),
            ),
        ),
        Task(
            id="sequential-search",
            title="SequentialSearch",
            description=(
                "Write a function search(lst, x) that returns the index of the "
                "first occurrence of x in lst, or -1 when x does not occur."
            ),
            entry_function="search",
            difficulty=Difficulty.EASY,
            solution=(
                "def search(lst, x):\n"
                "    for i in range(len(lst)):\n"
                "        if lst[i] == x:\n"
                "            return i\n"
                "    return -1\n"
            ),
            suite=cases(
                ([[1, 2, 3], 2], 1),
                ([[1, 2, 3], 4], -1),
                ([[], 5], -1),
                ([[7, 7], 7], 0),
                ([["a", "b"], "b"], 1),
            ),
        ),
        Task(
            id="unique-months",
            title="UniqueDatesMonths",
            description=(
                "Write a function unique_months(dates) where dates is a list of "
                "[day, month] pairs. Return the sorted list of distinct month "
                "numbers that appear."
            ),
            entry_function="unique_months",
            difficulty=Difficulty.EASY,
            solution=(
                "def unique_months(dates):\n"
                "    months = []\n"
                "    for day, month in dates:\n"
                "        if month not in months:\n"
                "            months.append(month)\n"
                "    months.sort()\n"
                "    return months\n"
            ),
            suite=cases(
                ([[[1, 5], [2, 5], [3, 6]]], [5, 6]),
                ([[]], []),
                ([[[10, 1]]], [1]),
                ([[[1, 12], [2, 1], [3, 12]]], [1, 12]),
                ([[[4, 2], [5, 2]]], [2]),
            ),
        ),
    ]
    bugs = [
        BuggyProgram(
            id="duplicate-elimination-inverted",
            task_id="duplicate-elimination",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def remove_extras(lst):\n"
                "    result = []\n"
                "    for x in lst:\n"
                "        if x in result:\n"
                "            result.append(x)\n"
                "    return result\n"
            ),
        ),
        BuggyProgram(
            id="duplicate-elimination-set-order",
            task_id="duplicate-elimination",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def remove_extras(lst):\n"
                "    return list(set(lst))\n"
            ),
        ),
        BuggyProgram(
            id="sorting-tuples-ascending",
            task_id="sorting-tuples",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def sort_pairs(pairs):\n"
                "    return sorted(pairs, key=lambda p: p[1])\n"
            ),
        ),
        BuggyProgram(
            id="sorting-tuples-by-name",
            task_id="sorting-tuples",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def sort_pairs(pairs):\n"
                "    return sorted(pairs, key=lambda p: p[0], reverse=True)\n"
            ),
        ),
        BuggyProgram(
            id="top-k-forgot-reverse",
            task_id="top-k",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def top_k(lst, k):\n"
                "    return sorted(lst)[:k]\n"
            ),
        ),
        BuggyProgram(
            id="top-k-off-by-one",
            task_id="top-k",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def top_k(lst, k):\n"
                "    return sorted(lst, reverse=True)[:k - 1]\n"
            ),
        ),
        BuggyProgram(
            id="sequential-search-one-based",
            task_id="sequential-search",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def search(lst, x):\n"
                "    for i in range(len(lst)):\n"
                "        if lst[i] == x:\n"
                "            return i + 1\n"
                "    return -1\n"
            ),
        ),
        BuggyProgram(
            id="sequential-search-skips-first",
            task_id="sequential-search",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def search(lst, x):\n"
                "    for i in range(1, len(lst)):\n"
                "        if lst[i] == x:\n"
                "            return i\n"
                "    return -1\n"
            ),
        ),
        BuggyProgram(
            id="unique-months-unsorted",
            task_id="unique-months",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def unique_months(dates):\n"
                "    months = []\n"
                "    for day, month in dates:\n"
                "        if month not in months:\n"
                "            months.append(month)\n"
                "    return months\n"
            ),
        ),
        BuggyProgram(
            id="unique-months-uses-days",
            task_id="unique-months",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def unique_months(dates):\n"
                "    months = []\n"
                "    for day, month in dates:\n"
                "        if day not in months:\n"
                "            months.append(day)\n"
                "    months.sort()\n"
                "    return months\n"
            ),
        ),
    ]
    return Corpus(name="intro-basics", tasks=tuple(tasks), bugs=tuple(bugs))


def algo_basics() -> Corpus:
    tasks = [
        Task(
            id="palindrome",
            title="Palindrome",
            description=(
                "Write a function is_palindrome(s) that returns 1 when the "
                "string s reads the same forwards and backwards, otherwise 0. "
                "Aim for O(len(s)) time and O(1) extra space. "
                "Example: is_palindrome(\"abba\") returns 1."
            ),
            entry_function="is_palindrome",
            difficulty=Difficulty.MEDIUM,
            solution=(
                "def is_palindrome(s):\n"
                "    i, j = 0, len(s) - 1\n"
                "    while i < j:\n"
                "        if s[i] != s[j]:\n"
                "            return 0\n"
                "        i += 1\n"
                "        j -= 1\n"
                "    return 1\n"
            ),
            suite=cases(
                (["abba"], 1),
                (["abc"], 0),
                ([""], 1),
                (["a"], 1),
                (["abcba"], 1),
                (["ab"], 0),
            ),
        ),
        Task(
            id="gcd",
            title="GCD",
            description=(
                "Write a function gcd(a, b) returning the greatest common "
                "divisor of the non-negative integers a and b. gcd(x, 0) is x."
            ),
            entry_function="gcd",
            difficulty=Difficulty.MEDIUM,
            solution=(
                "def gcd(a, b):\n"
                "    while b:\n"
                "        a, b = b, a % b\n"
                "    return a\n"
            ),
            suite=cases(
                ([12, 18], 6),
                ([7, 3], 1),
                ([0, 5], 5),
                ([42, 0], 42),
                ([100, 100], 100),
                ([270, 192], 6),
            ),
        ),
        Task(
            id="fibonacci",
            title="Fibonacci",
            description=(
                "Write a function fib_list(n) that returns a list of the first "
                "n Fibonacci numbers, starting 0, 1, 1, 2, ..."
            ),
            entry_function="fib_list",
            difficulty=Difficulty.MEDIUM,
            solution=(
                "def fib_list(n):\n"
                "    seq = []\n"
                "    a, b = 0, 1\n"
                "    for _ in range(n):\n"
                "        seq.append(a)\n"
                "        a, b = b, a + b\n"
                "    return seq\n"
            ),
            suite=cases(
                ([0], []),
                ([1], [0]),
                ([2], [0, 1]),
                ([6], [0, 1, 1, 2, 3, 5]),
                ([8], [0, 1, 1, 2, 3, 5, 8, 13]),
            ),
        ),
    ]
    bugs = [
        BuggyProgram(
            id="palindrome-index-error",
            task_id="palindrome",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def is_palindrome(s):\n"
                "    for i in range(len(s) // 2):\n"
                "        if s[i] != s[len(s) - i]:\n"
                "            return 0\n"
                "    return 1\n"
            ),
        ),
        BuggyProgram(
            id="palindrome-inverted",
            task_id="palindrome",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def is_palindrome(s):\n"
                "    i, j = 0, len(s) - 1\n"
                "    while i < j:\n"
                "        if s[i] != s[j]:\n"
                "            return 1\n"
                "        i += 1\n"
                "        j -= 1\n"
                "    return 0\n"
            ),
        ),
        BuggyProgram(
            id="gcd-floordiv",
            task_id="gcd",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def gcd(a, b):\n"
                "    while b:\n"
                "        a, b = b, a // b\n"
                "    return a\n"
            ),
        ),
        BuggyProgram(
            id="gcd-returns-b",
            task_id="gcd",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def gcd(a, b):\n"
                "    while b:\n"
                "        a, b = b, a % b\n"
                "    return b\n"
            ),
        ),
        BuggyProgram(
            id="fibonacci-wrong-op",
            task_id="fibonacci",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def fib_list(n):\n"
                "    seq = []\n"
                "    a, b = 0, 1\n"
                "    for _ in range(n):\n"
                "        seq.append(a)\n"
                "        a, b = b, a * b\n"
                "    return seq\n"
            ),
        ),
        BuggyProgram(
            id="fibonacci-starts-at-one",
            task_id="fibonacci",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def fib_list(n):\n"
                "    seq = []\n"
                "    a, b = 1, 1\n"
                "    for _ in range(n):\n"
                "        seq.append(a)\n"
                "        a, b = b, a + b\n"
                "    return seq\n"
            ),
        ),
    ]
    return Corpus(name="algo-basics", tasks=tuple(tasks), bugs=tuple(bugs))


def karel_lists() -> Corpus:
    tasks = [
        Task(
            id="karel-palindrome",
            title="Palindrome",
            description=(
                "Given a linklist a, return True when the sequence of its values "
                "is a palindrome, otherwise False. A second linklist b of the "
                "same length (filled with zeros) is provided as scratch space "
                "for building the reverse. Both pointers start at the first "
                "element. Example: is_palindrome(a:[4, 5, 7, 5, 4], "
                "b:[0, 0, 0, 0, 0]) returns True. " + KAREL_OPS_NOTE
            ),
            entry_function="is_palindrome",
            difficulty=Difficulty.HARD,
            prelude=KAREL_PRELUDE,
            solution=(
                "def is_palindrome(a, b):\n"
                "    while True:\n"
                "        b.set_value(a.get_value())\n"
                "        if not a.has_next():\n"
                "            break\n"
                "        a.go_next()\n"
                "        b.go_next()\n"
                "    while a.has_prev():\n"
                "        a.go_prev()\n"
                "    while True:\n"
                "        if a.get_value() != b.get_value():\n"
                "            return False\n"
                "        if not a.has_next() or not b.has_prev():\n"
                "            return True\n"
                "        a.go_next()\n"
                "        b.go_prev()\n"
            ),
            suite=cases(
                ([[4, 5, 7, 5, 4], [0, 0, 0, 0, 0]], True, ),
                ([[1, 2], [0, 0]], False),
                ([[3], [0]], True),
                ([[2, 2], [0, 0]], True),
                ([[1, 2, 1, 2], [0, 0, 0, 0]], False),
                compare=BOOLEAN,
            ),
        ),
        Task(
            id="karel-sum",
            title="SumOfList",
            description=(
                "Given a linklist a, return the sum of all its values. The "
                "pointer starts at the first element. " + KAREL_OPS_NOTE
            ),
            entry_function="sum_list",
            difficulty=Difficulty.HARD,
            prelude=KAREL_PRELUDE,
            solution=(
                "def sum_list(a):\n"
                "    total = a.get_value()\n"
                "    while a.has_next():\n"
                "        a.go_next()\n"
                "        total += a.get_value()\n"
                "    return total\n"
            ),
            suite=cases(
                ([[1, 2, 3]], 6),
                ([[5]], 5),
                ([[0, 0]], 0),
                ([[2, -3, 4]], 3),
                ([[10, 20, 30, 40]], 100),
            ),
        ),
        Task(
            id="karel-move",
            title="Move",
            description=(
                "Given a linklist a and a non-negative integer n, move the "
                "pointer n steps forward from the first element and return the "
                "value there. If the list ends before n steps, stop at the last "
                "element and return its value. " + KAREL_OPS_NOTE
            ),
            entry_function="move",
            difficulty=Difficulty.HARD,
            prelude=KAREL_PRELUDE,
            solution=(
                "def move(a, n):\n"
                "    for _ in range(n):\n"
                "        if not a.has_next():\n"
                "            break\n"
                "        a.go_next()\n"
                "    return a.get_value()\n"
            ),
            suite=cases(
                ([[10, 20, 30], 1], 20),
                ([[10, 20, 30], 0], 10),
                ([[10, 20, 30], 5], 30),
                ([[7], 3], 7),
                ([[1, 2, 3, 4], 3], 4),
            ),
        ),
    ]
    bugs = [
        BuggyProgram(
            id="karel-palindrome-inverted",
            task_id="karel-palindrome",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def is_palindrome(a, b):\n"
                "    while True:\n"
                "        b.set_value(a.get_value())\n"
                "        if not a.has_next():\n"
                "            break\n"
                "        a.go_next()\n"
                "        b.go_next()\n"
                "    while a.has_prev():\n"
                "        a.go_prev()\n"
                "    while True:\n"
                "        if a.get_value() != b.get_value():\n"
                "            return True\n"
                "        if not a.has_next() or not b.has_prev():\n"
                "            return False\n"
                "        a.go_next()\n"
                "        b.go_prev()\n"
            ),
        ),
        BuggyProgram(
            id="karel-palindrome-no-rewind",
            task_id="karel-palindrome",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def is_palindrome(a, b):\n"
                "    while True:\n"
                "        b.set_value(a.get_value())\n"
                "        if not a.has_next():\n"
                "            break\n"
                "        a.go_next()\n"
                "        b.go_next()\n"
                "    while True:\n"
                "        if a.get_value() != b.get_value():\n"
                "            return False\n"
                "        if not a.has_prev() or not b.has_prev():\n"
                "            return True\n"
                "        a.go_prev()\n"
                "        b.go_prev()\n"
            ),
        ),
        BuggyProgram(
            id="karel-sum-skips-first",
            task_id="karel-sum",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def sum_list(a):\n"
                "    total = 0\n"
                "    while a.has_next():\n"
                "        a.go_next()\n"
                "        total += a.get_value()\n"
                "    return total\n"
            ),
        ),
        BuggyProgram(
            id="karel-sum-first-only",
            task_id="karel-sum",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def sum_list(a):\n"
                "    total = a.get_value()\n"
                "    while a.has_prev():\n"
                "        a.go_prev()\n"
                "        total += a.get_value()\n"
                "    return total\n"
            ),
        ),
        BuggyProgram(
            id="karel-move-unguarded",
            task_id="karel-move",
            origin=Origin.DESIGNED,
            split=Split.EVALUATION,
            source=(
                "def move(a, n):\n"
                "    for _ in range(n):\n"
                "        a.go_next()\n"
                "    return a.get_value()\n"
            ),
        ),
        BuggyProgram(
            id="karel-move-short",
            task_id="karel-move",
            origin=Origin.DESIGNED,
            split=Split.TRAINING,
            source=(
                "def move(a, n):\n"
                "    for _ in range(n - 1):\n"
                "        if not a.has_next():\n"
                "            break\n"
                "        a.go_next()\n"
                "    return a.get_value()\n"
            ),
        ),
    ]
    return Corpus(name="karel-lists", tasks=tuple(tasks), bugs=tuple(bugs))


def main() -> None:
    if OUT_ROOT.exists():
        shutil.rmtree(OUT_ROOT)
    for corpus in (intro_basics(), algo_basics(), karel_lists()):
        serialize_corpus(corpus, OUT_ROOT / corpus.name)
        print(f"wrote {corpus.name}: {len(corpus.tasks)} tasks, {len(corpus.bugs)} bugs")


if __name__ == "__main__":
    main()
