"""Porter's suffix-stripping algorithm (the 1980 rule set, steps 1a-5b).

Implements the rules exactly as published: within a rule group only the
longest matching suffix is considered, and if its condition fails no other
rule fires.  Words of length 1 or 2 and inputs that are not lowercase
ASCII letters are returned unchanged.
"""

from __future__ import annotations

_VOWELS = "aeiou"


def _cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    # number of vowel-sequence -> consonant-sequence transitions
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        consonant = _cons(stem, i)
        if prev_vowel and consonant:
            m += 1
        prev_vowel = not consonant
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(stem: str) -> bool:
    return len(stem) >= 2 and stem[-1] == stem[-2] and _cons(stem, len(stem) - 1)


def _ends_cvc(stem: str) -> bool:
    n = len(stem)
    if n < 3 or not _cons(stem, n - 1) or _cons(stem, n - 2) or not _cons(stem, n - 3):
        return False
    return stem[-1] not in "wxy"


def _longest_rule(word: str, rules):
    best = None
    for suffix, replacement in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, replacement)
    return best


def _apply_m_rules(word: str, rules, min_m: int) -> str:
    match = _longest_rule(word, rules)
    if match is None:
        return word
    suffix, replacement = match
    stem = word[: len(word) - len(suffix)]
    if _measure(stem) > min_m:
        return stem + replacement
    return word


def _step1a(word: str) -> str:
    match = _longest_rule(word, [("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")])
    if match is None:
        return word
    suffix, replacement = match
    return word[: len(word) - len(suffix)] + replacement


def _post_1b(stem: str) -> str:
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if _ends_double_cons(stem) and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        stem = word[:-3]
        return stem + "ee" if _measure(stem) > 0 else word
    if word.endswith("ed"):
        stem = word[:-2]
        return _post_1b(stem) if _has_vowel(stem) else word
    if word.endswith("ing"):
        stem = word[:-3]
        return _post_1b(stem) if _has_vowel(stem) else word
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_STEP2_RULES = [
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
]

_STEP3_RULES = [
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
]

_STEP4_SUFFIXES = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def _step4(word: str) -> str:
    match = _longest_rule(word, [(s, "") for s in _STEP4_SUFFIXES])
    if match is None:
        return word
    suffix, _ = match
    stem = word[: len(word) - len(suffix)]
    if suffix == "ion" and not (stem and stem[-1] in "st"):
        return word
    if _measure(stem) > 1:
        return stem
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return word


def _step5b(word: str) -> str:
    if word.endswith("l") and _ends_double_cons(word) and _measure(word) > 1:
        return word[:-1]
    return word


def porter_stem(term: str) -> str:
    """Stem one token; non-lowercase-ASCII-alphabetic input passes through."""
    if len(term) <= 2:
        return term
    if not (term.isascii() and term.isalpha() and term.islower()):
        return term
    word = _step1a(term)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_m_rules(word, _STEP2_RULES, 0)
    word = _apply_m_rules(word, _STEP3_RULES, 0)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word
