"""Regenerates the bundled demo mock script used by tests, CLI, and service.

The script targets the intro-basics duplicate-elimination-inverted bug:
repair samples land at token distances {echo, 7, 3, prose, 9} so the
pipeline must select the distance-3 candidate; hint responses follow the
EXPLANATION:/HINT: output contract.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

OUT = Path(__file__).resolve().parents[1] / "src" / "hintgen" / "data" / "mockscripts" / "demo.json"

BUG_ECHO = """def remove_extras(lst):
    result = []
    for x in lst:
        if x in result:
            result.append(x)
    return result
"""

CAND_7 = """def remove_extras(lst):
    seen = []
    for x in lst:
        if x not in seen:
            seen.append(x)
    return (seen)
"""

CAND_3 = """def remove_extras(lst):
    result = []
    for x in lst:
        if x not in result:
            result.append(x)
    return (result)
"""

CAND_9 = """def remove_extras(lst):
    result = list()
    for item in lst:
        if item not in result:
            result.append(item)
    return (result)
"""

PROSE = (
    "The loop never stores anything because the membership check is inverted; "
    "nothing is ever appended, so every input collapses to an empty list."
)

REPAIR_SCOPE = "if x in result:.*Fix the program"
HINT_SCOPE = "if x in result:.*Socratic-style hint"
TUPLE_SCOPE = "remove_extras.*Do three things"

CANONICAL_FIX = """def remove_extras(lst):
    result = []
    for x in lst:
        if x not in result:
            result.append(x)
    return result
"""

TUPLE_RESPONSE = (
    "Here you go.\n\n```python\n" + CANONICAL_FIX + "```\n"
    "EXPLANATION: The program never keeps first occurrences in their original "
    "order; rebuilding the result with a seen-check per element preserves order "
    "while dropping repeats.\n"
    "HINT: Walk through your loop with [5, 2, 1, 2, 3] on paper: which elements "
    "end up in the result, and in what order?"
)

HINT_RESPONSE = (
    "EXPLANATION: The condition guarding result.append(x) is inverted. Elements are "
    "appended only when they are already in result, so result stays empty forever and "
    "no first occurrences are kept. The fix is to append exactly when the element has "
    "not been seen yet.\n"
    "HINT: Look at the if-condition inside your loop: when do you actually want to add "
    "x to the result list?"
)

GENERIC_HINT_RESPONSE = (
    "EXPLANATION: The program's output disagrees with the expected results on the "
    "failing tests; compare the produced values with the expectations to narrow down "
    "which step of the computation drifts away.\n"
    "HINT: Run the first failing test by hand on paper: where does your program's "
    "value first differ from the expected one?"
)


def fenced(code: str) -> str:
    return f"Here is the corrected program:\n\n```python\n{code}```\n"


def main() -> None:
    script = {
        "default": "OK",
        "rules": [
            {"pattern": REPAIR_SCOPE, "sample_index": 0, "response": fenced(BUG_ECHO)},
            {"pattern": REPAIR_SCOPE, "sample_index": 1, "response": fenced(CAND_7)},
            {"pattern": REPAIR_SCOPE, "sample_index": 2, "response": fenced(CAND_3)},
            {"pattern": REPAIR_SCOPE, "sample_index": 3, "response": PROSE},
            {"pattern": REPAIR_SCOPE, "sample_index": 4, "response": fenced(CAND_9)},
            {"pattern": TUPLE_SCOPE, "response": TUPLE_RESPONSE},
            {"pattern": HINT_SCOPE, "response": HINT_RESPONSE},
            {"pattern": "Socratic-style hint", "response": GENERIC_HINT_RESPONSE},
        ],
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(script, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
