"""Reference program corpus.

Best published programs per task for three synthesis variants:

* ``search``        -- latent-space CEM search over the baseline dataset
* ``search_tuned``  -- the same search over our regenerated dataset
* ``composed``      -- the hierarchical composer (a tuple of sub-programs,
                       executed in order, each under its own action budget)

These strings double as parser fixtures: parsing and re-printing any entry
must reproduce its token stream exactly.
"""

from __future__ import annotations

from . import dsl

SEARCH = "search"
SEARCH_TUNED = "search_tuned"
COMPOSED = "composed"
VARIANTS = (SEARCH, SEARCH_TUNED, COMPOSED)

# fmt: off
PROGRAMS = {
    "StairClimber": {
        SEARCH: (
            "DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) "
            "WHILE c( rightIsClear c) w( turnLeft w) m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( turnRight turnRight "
            "WHILE c( noMarkersPresent c) w( turnRight move w) m)",
        ),
        COMPOSED: (
            "DEF run m( WHILE c( noMarkersPresent c) w( "
            "turnRight move turnRight move w) m)",
        ),
    },
    "TopOff": {
        SEARCH: (
            "DEF run m( WHILE c( noMarkersPresent c) w( move w) putMarker move "
            "WHILE c( not c( markersPresent c) c) w( move w) putMarker move "
            "WHILE c( not c( markersPresent c) c) w( move w) putMarker move "
            "turnRight turnRight turnRight turnRight "
            "turnRight turnRight turnRight turnRight m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( WHILE c( not c( rightIsClear c) c) w( "
            "WHILE c( not c( markersPresent c) c) w( move w) putMarker move w) "
            "WHILE c( not c( rightIsClear c) c) w( pickMarker w) m)",
        ),
        COMPOSED: (
            "DEF run m( REPEAT R=5 r( move "
            "WHILE c( noMarkersPresent c) w( move w) putMarker r) m)",
        ),
    },
    "CleanHouse": {
        SEARCH: (
            "DEF run m( WHILE c( noMarkersPresent c) w( "
            "turnRight move move turnLeft turnRight pickMarker w) "
            "turnLeft turnRight m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( move WHILE c( noMarkersPresent c) w( turnRight move "
            "WHILE c( frontIsClear c) w( move pickMarker w) w) m)",
        ),
        COMPOSED: (
            "DEF run m( WHILE c( noMarkersPresent c) w( "
            "turnRight move pickMarker pickMarker w) m)",
        ) * 4,
    },
    "FourCorner": {
        SEARCH: (
            "DEF run m( turnRight move turnRight turnRight turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight putMarker "
            "WHILE c( frontIsClear c) w( move w) turnRight putMarker "
            "WHILE c( frontIsClear c) w( move w) turnRight putMarker "
            "WHILE c( frontIsClear c) w( move w) turnRight putMarker m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( REPEAT R=5 r( WHILE c( frontIsClear c) w( move w) "
            "IFELSE c( not c( rightIsClear c) c) i( turnLeft putMarker i) "
            "ELSE e( putMarker e) r) m)",
        ),
        COMPOSED: (
            "DEF run m( move WHILE c( frontIsClear c) w( move w) "
            "putMarker turnLeft m)",
        ) * 4,
    },
    "Maze": {
        SEARCH: (
            "DEF run m( IF c( frontIsClear c) i( turnLeft i) "
            "WHILE c( noMarkersPresent c) w( turnRight move w) m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) "
            "turnRight turnRight turnRight m)",
        ),
        COMPOSED: (
            "DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) "
            "WHILE c( noMarkersPresent c) w( turnRight move w) m)",
        ),
    },
    "Harvester": {
        SEARCH: (
            "DEF run m( turnLeft turnLeft pickMarker move pickMarker "
            "pickMarker move pickMarker move pickMarker move pickMarker move "
            "turnLeft pickMarker move pickMarker move pickMarker move "
            "pickMarker move turnLeft pickMarker move pickMarker move "
            "pickMarker move pickMarker move turnLeft pickMarker move "
            "pickMarker move pickMarker move m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( WHILE c( leftIsClear c) w( "
            "REPEAT R=4 r( pickMarker move r) "
            "turnLeft pickMarker move turnLeft pickMarker move w) "
            "turnLeft pickMarker turnLeft m)",
        ),
        COMPOSED: (
            "DEF run m( REPEAT R=4 r( REPEAT R=4 r( "
            "pickMarker turnRight move pickMarker turnRight move "
            "pickMarker move pickMarker move r) "
            "turnRight pickMarker move pickMarker move pickMarker move r) m)",
        ),
    },
    "DoorKey": {
        SEARCH: (
            "DEF run m( move turnRight putMarker pickMarker move "
            "WHILE c( leftIsClear c) w( pickMarker move w) m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( WHILE c( rightIsClear c) w( turnRight pickMarker "
            "turnLeft pickMarker pickMarker pickMarker pickMarker move "
            "turnLeft move w) m)",
        ),
        COMPOSED: (
            "DEF run m( REPEAT R=4 r( REPEAT R=4 r( "
            "turnRight move pickMarker move pickMarker move r) "
            "pickMarker move r) m)",

            "DEF run m( REPEAT R=5 r( turnRight move "
            "REPEAT R=5 r( move r) move pickMarker move r) m)",

            "DEF run m( REPEAT R=4 r( REPEAT R=4 r( turnRight move "
            "REPEAT R=3 r( move pickMarker move pickMarker r) r) r) m)",

            "DEF run m( REPEAT R=4 r( REPEAT R=4 r( "
            "turnRight move pickMarker move pickMarker "
            "REPEAT R=2 r( pickMarker move pickMarker pickMarker r) r) r) m)",

            "DEF run m( REPEAT R=4 r( turnRight "
            "REPEAT R=4 r( turnRight move move pickMarker move r) "
            "move pickMarker move r) move pickMarker m)",
        ),
    },
    "OneStroke": {
        SEARCH: (
            "DEF run m( REPEAT R=9 r( turnRight turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) r) turnRight m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( turnRight WHILE c( frontIsClear c) w( "
            "WHILE c( frontIsClear c) w( WHILE c( frontIsClear c) w( "
            "WHILE c( frontIsClear c) w( move w) turnRight w) turnRight w) "
            "turnRight w) turnRight m)",
        ),
        COMPOSED: (
            "DEF run m( WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight m)",

            "DEF run m( WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight m)",

            "DEF run m( WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight m)",

            "DEF run m( WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight "
            "WHILE c( frontIsClear c) w( move w) turnRight m)",
        ),
    },
    "Seeder": {
        SEARCH: (
            "DEF run m( WHILE c( noMarkersPresent c) w( "
            "turnRight putMarker move move w) "
            "turnRight turnRight turnRight turnRight "
            "turnRight turnRight turnRight turnRight m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( WHILE c( noMarkersPresent c) w( "
            "putMarker move turnRight move w) "
            "turnRight turnRight turnRight turnRight "
            "turnRight turnRight turnRight turnRight m)",
        ),
        # The published fourth sub-program is truncated mid-listing (its
        # closing m) is missing); it is restored here to match its siblings.
        COMPOSED: (
            "DEF run m( putMarker move putMarker move putMarker move "
            "putMarker move putMarker move turnRight move m)",

            "DEF run m( putMarker move putMarker move putMarker move "
            "putMarker move putMarker move turnRight move putMarker move m)",

            "DEF run m( putMarker move putMarker move putMarker move "
            "putMarker move turnRight move putMarker move turnRight move m)",

            "DEF run m( putMarker move putMarker move putMarker move "
            "putMarker move turnRight move putMarker move turnRight move m)",

            "DEF run m( putMarker move putMarker move putMarker move "
            "putMarker move turnRight move putMarker move turnRight move m)",
        ),
    },
    "Snake": {
        SEARCH: (
            "DEF run m( turnRight turnLeft pickMarker move move move "
            "WHILE c( rightIsClear c) w( turnLeft move move w) "
            "turnLeft turnLeft turnLeft turnLeft m)",
        ),
        SEARCH_TUNED: (
            "DEF run m( move turnRight pickMarker pickMarker "
            "WHILE c( rightIsClear c) w( turnLeft move move w) "
            "turnRight move move move m)",
        ),
        COMPOSED: (
            "DEF run m( move WHILE c( noMarkersPresent c) w( "
            "move move turnLeft w) move turnLeft m)",

            "DEF run m( move WHILE c( noMarkersPresent c) w( "
            "move move turnLeft w) m)",

            "DEF run m( move WHILE c( noMarkersPresent c) w( "
            "move move turnLeft w) move turnLeft m)",
        ),
    },
}
# fmt: on

# Published best mean returns per task (the composed variant's score).
BEST_RETURNS = {
    "StairClimber": 1.00,
    "FourCorner": 1.00,
    "TopOff": 1.00,
    "Maze": 1.00,
    "CleanHouse": 1.00,
    "Harvester": 1.00,
    "DoorKey": 0.50,
    "OneStroke": 0.80,
    "Seeder": 0.58,
    "Snake": 0.28,
}

# Tasks whose composed entries reproduce the published score under the
# 10-configuration evaluation protocol (the rest depend on layout details
# that are hand-authored here, so they are reported but not asserted).
ASSERTED_TASKS = ("StairClimber", "FourCorner", "TopOff", "Maze", "Harvester")

# The composer may emit the same sub-program at several macro steps; for
# Harvester the single listed sub-program is repeated to the macro horizon
# (one pass picks at most 40 markers under the action budget).
MACRO_HORIZON = 5


def iter_listings():
    """Yield (task, variant, index, text) over the whole corpus."""
    for task, variants in PROGRAMS.items():
        for variant, listings in variants.items():
            for i, text in enumerate(listings):
                yield task, variant, i, text


def composed_programs(task):
    """Parsed sub-program sequence for a task's composed entry, expanded to
    the macro horizon where the listing shows a single sub-program for a
    task that needs several passes."""
    listings = PROGRAMS[task][COMPOSED]
    if task == "Harvester":
        listings = listings * MACRO_HORIZON
    return [dsl.parse_text(text) for text in listings]
