import textwrap

import pytest


@pytest.fixture
def write_csv(tmp_path):
    """Write dedented CSV text under tmp_path and return the path."""
    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return str(path)
    return _write


SMALL_COMMENTS = """\
comment_id,board_id,discussion_id,user,posted_at,body
c1,notes,d1,ann,2016-01-05T10:00:00Z,first #A #b
c2,notes,d1,bo,2016-01-12T10:00:00Z,#a and #c
c3,notes,d1,cy,2016-01-19T10:00:00Z,#b
c4,chat,d1,di,2016-01-20T10:00:00Z,#a #zz
c5,notes,d2,ann,2016-01-06T10:00:00Z,#x #y
c6,notes,d2,bo,2016-01-26T10:00:00Z,#x
c7,notes,d3,cy,2016-01-13T10:00:00Z,#q #r #s
c8,notes,d4,di,2016-01-13T10:00:00Z,no tags at all
"""

SMALL_SEEDS = """\
proposal_id,submission_date,seed_tag
P1,2016-03-01,#a
P2,2016-03-01,#x
P3,2016-03-01,#q
"""

# rules per proposal with the Notes filter on: singles + 2 * pairs
SMALL_PAIR_COUNTS = {"P1": 3 + 2 * 2, "P2": 2 + 2 * 1, "P3": 3 + 2 * 3}


@pytest.fixture
def small_corpus(tmp_path):
    """Three proposals over nine weeks; returns a config dict for config_from_dict."""
    (tmp_path / "comments.csv").write_text(SMALL_COMMENTS, encoding="utf-8")
    (tmp_path / "seeds.csv").write_text(SMALL_SEEDS, encoding="utf-8")
    return {
        "comments": str(tmp_path / "comments.csv"),
        "seeds": str(tmp_path / "seeds.csv"),
        "output_dir": str(tmp_path / "out"),
        "epoch_date": "2016-01-04",
        "notes_boards": ["notes"],
    }
