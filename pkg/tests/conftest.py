from pathlib import Path

import pytest
from hypothesis import settings

from nlgbidi.model import Record, TripleSet

DATA = Path(__file__).parent / "data"

# Oracle-backed properties are slow by design; wall-clock deadlines only add flakiness.
settings.register_profile("nlgbidi", deadline=None)
settings.load_profile("nlgbidi")

# WebNLG records 241-244 with raw terms.
SAMPLE_RECORDS = {
    241: (
        [["Mexico", "language", "Spanish_language"]],
        ["In Mexico, the spoken language is Spanish.",
         "Spanish is the language spoken in Mexico.",
         "The language of Mexico is Spanish."],
    ),
    242: (
        [["Philippines", "language", "Arabic"]],
        ["One of the languages used in the Philippines is Arabic.",
         "Arabic is a language spoken in the Philippines.",
         "One of the languages in Philippines is Arabic.",
         "Arabic is one of the languages spoken in the Philippines."],
    ),
    243: (
        [["Siomay", "dishVariation", "Shumai"]],
        ["Shumai is a variation of the dish Siomay.",
         "Siomay and Shumai are variations of the same dish."],
    ),
    244: (
        [["United_States", "ethnicGroup", "Native_Americans_in_the_United_States"]],
        ["Native Americans in the United States are one of the ethnic groups of the country."],
    ),
}

WIKIBIO_SENTENCES = [
    "john chubb -lrb- 1816 -- 1872 -rrb- , was an english locksmith and inventor . he wrote an important paper on locks and keys , and was awarded the telford medal .",
    "mary kendall browne -lrb- june 3 , 1891 -- august 19 , 1971 -rrb- was the first american female professional tennis player , a world no. 1 amateur tennis player , and an amateur golfer . she was born in ventura county , california , united states .",
    "nicholas phillip ebanks -lrb- born 27 june 1990 -rrb- is a caymanian footballer who plays as a defender . he has represented the cayman islands during the 2010 caribbean championship and world cup qualifying matches in 2011 .",
    "warren archard luhning -lrb- born july 3 , 1975 -rrb- is a retired canadian professional ice hockey winger .",
]

SPIRIT_RAW = [
    ["Spirit_of_future_yet_to_come", "appears in", "A_Christmas_Carol"],
    ["Spirit_of_future_yet_to_come", "is a", "fictional_character"],
    ["Spirit_of_future_yet_to_come", "is a", "ghost"],
    ["Spirit_of_future_yet_to_come", "createdBy", "Charles_Dickens"],
    ["Spirit_of_future_yet_to_come", "appearsBefore", "Ebenezer_Scrooge"],
]

SPIRIT_LISTING = """let A = "The Spirit of Christmas Yet To Come";
$A | appears in | A Christmas Carol;
$A | is a | fictional character;
$A | is a | ghost;
$A | created by | Charles Dickens;
$A | appears before | Ebenezer Scrooge;"""

BUCURESTI_ROW = (
    "The 1 Decembrie 1918 University is located in "
    + " ".join(["Bucuresti"] * 19)
    + " Bucu"
)


def sample_record(rid: int) -> Record:
    triples, refs = SAMPLE_RECORDS[rid]
    return Record(rid, TripleSet.from_raw(triples), tuple(refs), "train", "webnlg")


@pytest.fixture
def record_241() -> Record:
    return sample_record(241)


@pytest.fixture
def fixture_path() -> Path:
    return DATA / "webnlg_sample.jsonl"


# -- acceptance report ---------------------------------------------------------
# Tests marked ``criterion(n, title)`` get one PASS/FAIL/SKIP line each in the
# terminal summary, in criterion order.

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or report.outcome != "passed":
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = ""
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        previous = _ACCEPTANCE.get(number)
        if previous is None or previous[0] == "PASS":
            _ACCEPTANCE[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        line = f"criterion {number:>2} {status}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
