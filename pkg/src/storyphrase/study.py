"""Study protocol: conditions, assignment, schedule, logins and metrics.

The protocol follows a two-part design: a memorization phase (round 0)
where the participant is assigned a passphrase and must log in with it,
then six recall rounds opening 6h, 1d, 2d, 3d, 4d and 5d after
enrollment.  Each login allows three attempts; after the third incorrect
attempt the passphrase is revealed and the round is failed.  Everything
is recorded as StudyEvents and every metric is a pure function of the
event list.

Metric definitions (per round i, within one condition or story):

* participants(i): opened round i.
* NumRemembered(i): passed round i (necessarily with < 3 incorrect).
* NumSuccessfulReturned(i): opened round i having passed round i-1
  (memorization counts as passed for i=1).
* NumSurvived(i): passed every round 1..i.
* NumSuccessful(i): failed round i-1, then passed round i.
* Dropout(i): opened round i-1 but never opened round i.
* SuccessRate(i) = NumRemembered/participants; FailureRate = complement;
  ConditionalSurvival(i) = NumSurvived/NumSuccessfulReturned.

A participant may return after failing a round, but a skipped round ends
participation (rounds unlock in order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .errors import (
    ConfigError,
    EmptyDictionary,
    MalformedLog,
    PoolExhausted,
    RoundAlreadyTerminal,
    RoundClosed,
    RoundLocked,
)
from .events import StudyEvent
from .rng import SplitMix64
from .similarity import DefaultEmbeddingProvider, bucket_attempt, check_assignable

CONDITIONS = ("random", "familiar")
DEFAULT_OFFSETS = [21600.0, 86400.0, 172800.0, 259200.0, 345600.0, 432000.0]

SURVEY_AGREEMENT_KEYS = ("annoying", "difficult", "fun")
SURVEY_STORY_KEYS = ("read_or_watched", "imagined_scene", "scene_related")


def load_wordlist(name: str) -> list[str]:
    data = resources.files("storyphrase") / "data"
    words = [
        w.strip()
        for w in (data / f"{name}.txt").read_text(encoding="utf-8").splitlines()
        if w.strip()
    ]
    return words


@dataclass
class StudyConfig:
    stories: list[str] = field(default_factory=list)
    schedule_offsets: list[float] = field(default_factory=lambda: list(DEFAULT_OFFSETS))
    attempts_per_login: int = 3
    round_window: float = 86400.0
    dedup_theta: float = 0.8
    seed: int = 0
    nouns: list[str] = field(default_factory=lambda: load_wordlist("nouns"))
    verbs: list[str] = field(default_factory=lambda: load_wordlist("verbs"))
    adjectives: list[str] = field(default_factory=lambda: load_wordlist("adjectives"))
    # story -> ranked candidate word lists (rank 1 first)
    pools: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(
            b <= a for a, b in zip(self.schedule_offsets, self.schedule_offsets[1:])
        ):
            raise ConfigError("schedule_offsets must be strictly increasing")
        if self.attempts_per_login < 1:
            raise ConfigError("attempts_per_login must be >= 1")
        if self.round_window <= 0:
            raise ConfigError("round_window must be positive")
        if not 0 < self.dedup_theta <= 1:
            raise ConfigError("dedup_theta must be in (0, 1]")

    @property
    def rounds(self) -> int:
        return len(self.schedule_offsets)


def generate_random_passphrase(dicts, seed: int) -> list[str]:
    """A "noun verb adjective noun" passphrase, nouns drawn with replacement."""
    nouns, verbs, adjectives = dicts
    for name, lst in (("nouns", nouns), ("verbs", verbs), ("adjectives", adjectives)):
        if not lst:
            raise EmptyDictionary(f"{name} list is empty")
    rng = SplitMix64(seed)
    return [rng.choice(nouns), rng.choice(verbs), rng.choice(adjectives), rng.choice(nouns)]


@dataclass
class AssignmentPool:
    """Ranked per-story candidate pool; entries are consumed once assigned."""

    entries: list  # list of word lists, rank 1 first
    consumed: set = field(default_factory=set)


def assign_familiar_passphrase(
    pool: AssignmentPool, already_assigned, theta: float, provider=None
) -> list[str]:
    """Lowest-rank unconsumed entry sufficiently dissimilar from all
    already-assigned passphrases; raises PoolExhausted otherwise."""
    provider = provider or DefaultEmbeddingProvider()
    assigned_texts = [
        " ".join(entry) if not isinstance(entry, str) else entry
        for entry in already_assigned
    ]
    for index, words in enumerate(pool.entries):
        if index in pool.consumed:
            continue
        if check_assignable(" ".join(words), assigned_texts, theta, provider):
            pool.consumed.add(index)
            return list(words)
    raise PoolExhausted("no pool entry passes the dissimilarity check")


def schedule(enrolled_at: float, config: StudyConfig):
    """[(round i, opens_at, closes_at)] for the recall rounds."""
    return [
        (i, enrolled_at + offset, enrolled_at + offset + config.round_window)
        for i, offset in enumerate(config.schedule_offsets, start=1)
    ]


def verify_attempt(assigned_words, input_text: str) -> bool:
    """Case-sensitive word-by-word comparison after whitespace normalization."""
    return input_text.split() == list(assigned_words)


@dataclass
class RoundState:
    opened: bool = False
    incorrect: int = 0
    terminal: str | None = None  # None | "passed" | "failed"


@dataclass
class ParticipantState:
    id: str
    condition: str
    enrolled_at: float
    token: str = ""
    story: str | None = None
    assignment: list[str] | None = None
    familiarity: str = "unknown"  # read-or-watched | neither | unknown
    survey: dict | None = None
    rounds: dict = field(default_factory=dict)  # i -> RoundState

    def round(self, i: int) -> RoundState:
        if i not in self.rounds:
            self.rounds[i] = RoundState()
        return self.rounds[i]

    @property
    def excluded(self) -> bool:
        return self.familiarity == "neither"


class StudyState:
    """Replayable protocol state.  Command methods validate, append events
    via the sink, apply them, and return the outcome; `apply` alone is the
    replay path and never re-validates against the clock."""

    def __init__(self, config: StudyConfig, provider=None, sink=None):
        self.config = config
        self.provider = provider or DefaultEmbeddingProvider()
        self.sink = sink  # callable(list[StudyEvent]) -> None
        self.participants: dict[str, ParticipantState] = {}
        self.pools = {
            story: AssignmentPool(entries=list(entries))
            for story, entries in config.pools.items()
        }
        self.assigned_by_story: dict[str, list[str]] = {}
        self.request_outcomes: dict = {}  # (pid, request_id) -> outcome
        self.events: list[StudyEvent] = []

    # -- helpers ---------------------------------------------------------

    def _emit(self, events):
        if self.sink is not None:
            self.sink(events)
        for event in events:
            self.apply(event)

    def _next_id(self) -> str:
        return f"p{len(self.participants) + 1:04d}"

    def _derived_rng(self, tag: int, index: int) -> SplitMix64:
        mix = SplitMix64(self.config.seed ^ tag)
        for _ in range(index % 64 + 1):
            mix.next_u64()
        return SplitMix64(mix.next_u64() + index)

    def _round_bounds(self, participant: ParticipantState, i: int):
        if i == 0:
            opens = participant.enrolled_at
        else:
            opens = participant.enrolled_at + self.config.schedule_offsets[i - 1]
        return opens, opens + self.config.round_window

    def condition_counts(self) -> dict:
        counts = {c: 0 for c in CONDITIONS}
        for p in self.participants.values():
            counts[p.condition] += 1
        return counts

    # -- commands --------------------------------------------------------

    def enroll(self, at: float, condition: str = "auto") -> dict:
        if condition == "auto":
            counts = self.condition_counts()
            condition = min(CONDITIONS, key=lambda c: (counts[c], c))
        if condition not in CONDITIONS:
            raise ConfigError(f"unknown condition {condition!r}")
        index = len(self.participants)
        pid = self._next_id()
        token_rng = self._derived_rng(0x70CE, index)
        token = f"{token_rng.next_u64():016x}{token_rng.next_u64():016x}"
        events = [
            StudyEvent(
                at=at,
                participant=pid,
                kind="enrolled",
                round=0,
                payload={"condition": condition, "token": token},
            )
        ]
        if condition == "random":
            words = generate_random_passphrase(
                (self.config.nouns, self.config.verbs, self.config.adjectives),
                seed=self._derived_rng(0x5EED, index).next_u64(),
            )
            events.append(
                StudyEvent(
                    at=at,
                    participant=pid,
                    kind="assigned",
                    round=0,
                    payload={"words": words},
                )
            )
        self._emit(events)
        return {"id": pid, "token": token, "condition": condition}

    def choose_story(self, pid: str, at: float, story: str) -> dict:
        participant = self.participants[pid]
        if participant.condition != "familiar":
            raise ConfigError("story choice applies to the familiar condition only")
        if participant.story is not None:
            raise ConfigError("story already chosen")
        if story not in self.config.stories:
            raise ConfigError(f"unknown story {story!r}")
        pool = self.pools.get(story)
        if pool is None:
            raise ConfigError(f"no candidate pool configured for {story!r}")
        before = set(pool.consumed)
        words = assign_familiar_passphrase(
            pool,
            self.assigned_by_story.get(story, []),
            self.config.dedup_theta,
            self.provider,
        )
        # assign_familiar_passphrase mutated the pool; record the index so
        # replay can reproduce consumption without re-running the check.
        index = (pool.consumed - before).pop()
        pool.consumed.discard(index)  # re-applied in apply()
        self._emit(
            [
                StudyEvent(at, pid, "story-chosen", 0, {"story": story}),
                StudyEvent(
                    at, pid, "assigned", 0,
                    {"words": words, "story": story, "pool_index": index},
                ),
            ]
        )
        return {"story": story}

    def attempt(
        self, pid: str, round_index: int, text: str, at: float, request_id=None
    ) -> dict:
        participant = self.participants[pid]
        if request_id is not None:
            key = (pid, request_id)
            if key in self.request_outcomes:
                return self.request_outcomes[key]
        if participant.assignment is None:
            raise RoundLocked("no passphrase assigned yet")
        if not 0 <= round_index <= self.config.rounds:
            raise ConfigError(f"round {round_index} out of range")
        if round_index >= 1:
            prev = participant.round(round_index - 1)
            if prev.terminal is None:
                raise RoundLocked(f"round {round_index - 1} not completed")
        state = participant.round(round_index)
        if state.terminal is not None:
            raise RoundAlreadyTerminal(f"round {round_index} already {state.terminal}")
        opens, closes = self._round_bounds(participant, round_index)
        if at < opens:
            raise RoundClosed(f"round {round_index} opens at {opens:.0f}")
        if at > closes:
            raise RoundClosed(f"round {round_index} closed at {closes:.0f}")

        correct = verify_attempt(participant.assignment, text)
        events = []
        if not state.opened:
            events.append(StudyEvent(at, pid, "round-opened", round_index, {}))
        payload = {"text": text, "correct": correct}
        if request_id is not None:
            payload["request_id"] = request_id
        events.append(StudyEvent(at, pid, "attempt", round_index, payload))

        if correct:
            events.append(
                StudyEvent(
                    at, pid, "round-passed", round_index,
                    {"incorrect": state.incorrect},
                )
            )
            outcome = {"outcome": "passed", "remaining": None, "revealed": None}
        elif state.incorrect + 1 >= self.config.attempts_per_login:
            revealed = " ".join(participant.assignment)
            events.append(
                StudyEvent(
                    at, pid, "round-failed", round_index,
                    {"incorrect": state.incorrect + 1},
                )
            )
            events.append(
                StudyEvent(at, pid, "revealed", round_index, {"words": participant.assignment})
            )
            outcome = {"outcome": "failed", "remaining": 0, "revealed": revealed}
        else:
            remaining = self.config.attempts_per_login - state.incorrect - 1
            outcome = {"outcome": "retry", "remaining": remaining, "revealed": None}

        if outcome["outcome"] in ("passed", "failed") and round_index < self.config.rounds:
            events.append(StudyEvent(at, pid, "invited", round_index + 1, {}))
        self._emit(events)
        return outcome

    def submit_survey(self, pid: str, at: float, answers: dict) -> dict:
        participant = self.participants[pid]
        if participant.survey is not None:
            raise ConfigError("survey already submitted")
        if participant.round(1).terminal is None:
            raise RoundLocked("survey opens after the first recall round")
        clean = {}
        for key in SURVEY_AGREEMENT_KEYS:
            value = answers.get(key)
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise ConfigError(f"answer {key!r} must be an integer 1..5")
            clean[key] = value
        for key in SURVEY_STORY_KEYS:
            if key in answers:
                if not isinstance(answers[key], bool):
                    raise ConfigError(f"answer {key!r} must be a boolean")
                clean[key] = answers[key]
        self._emit([StudyEvent(at, pid, "survey", 1, {"answers": clean})])
        return {"recorded": True}

    # -- replay ----------------------------------------------------------

    def apply(self, event: StudyEvent) -> None:
        self.events.append(event)
        kind = event.kind
        if kind == "enrolled":
            self.participants[event.participant] = ParticipantState(
                id=event.participant,
                condition=event.payload["condition"],
                enrolled_at=event.at,
                token=event.payload.get("token", ""),
            )
            return
        participant = self.participants.get(event.participant)
        if participant is None:
            raise MalformedLog(f"event for unknown participant {event.participant!r}")
        if kind == "story-chosen":
            participant.story = event.payload["story"]
        elif kind == "assigned":
            participant.assignment = list(event.payload["words"])
            story = event.payload.get("story")
            if story is not None:
                self.assigned_by_story.setdefault(story, []).append(
                    " ".join(participant.assignment)
                )
                index = event.payload.get("pool_index")
                if index is not None and story in self.pools:
                    self.pools[story].consumed.add(index)
        elif kind == "round-opened":
            participant.round(event.round).opened = True
        elif kind == "attempt":
            state = participant.round(event.round)
            state.opened = True
            if not event.payload.get("correct", False):
                state.incorrect += 1
                if state.incorrect >= self.config.attempts_per_login:
                    outcome = {
                        "outcome": "failed",
                        "remaining": 0,
                        "revealed": " ".join(participant.assignment or []),
                    }
                else:
                    outcome = {
                        "outcome": "retry",
                        "remaining": self.config.attempts_per_login - state.incorrect,
                        "revealed": None,
                    }
            else:
                outcome = {"outcome": "passed", "remaining": None, "revealed": None}
            request_id = event.payload.get("request_id")
            if request_id is not None:
                self.request_outcomes[(event.participant, request_id)] = outcome
        elif kind == "round-passed":
            participant.round(event.round).terminal = "passed"
        elif kind == "round-failed":
            participant.round(event.round).terminal = "failed"
        elif kind == "survey":
            answers = event.payload.get("answers", {})
            participant.survey = answers
            if "read_or_watched" in answers:
                participant.familiarity = (
                    "read-or-watched" if answers["read_or_watched"] else "neither"
                )
        elif kind in ("revealed", "invited"):
            pass
        else:
            raise MalformedLog(f"unknown event kind {kind!r}")


def replay(config: StudyConfig, events, provider=None) -> StudyState:
    state = StudyState(config, provider=provider)
    for event in events:
        state.apply(event)
    return state


# -- metrics ---------------------------------------------------------------


@dataclass
class MetricsRow:
    i: int
    participants: int
    num_successful_returned: int
    num_remembered: int
    num_survived: int
    num_successful: int | None
    dropout: int
    success_rate: float
    failure_rate: float
    conditional_survival: float

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "participants": self.participants,
            "num_successful_returned": self.num_successful_returned,
            "num_remembered": self.num_remembered,
            "num_survived": self.num_survived,
            "num_successful": self.num_successful,
            "dropout": self.dropout,
            "success_rate": round(self.success_rate, 2),
            "failure_rate": round(self.failure_rate, 2),
            "conditional_survival": round(self.conditional_survival, 2),
        }


@dataclass
class MetricsTable:
    participants0: int
    rows: list[MetricsRow]

    def to_dict(self) -> dict:
        return {
            "participants0": self.participants0,
            "rounds": [row.to_dict() for row in self.rows],
        }


@dataclass
class _Trajectory:
    condition: str
    story: str | None = None
    assigned: bool = False
    excluded: bool = False
    opened: set = field(default_factory=set)
    passed: set = field(default_factory=set)


def _trajectories(events) -> dict[str, _Trajectory]:
    people: dict[str, _Trajectory] = {}
    for event in events:
        if event.kind == "enrolled":
            people[event.participant] = _Trajectory(
                condition=event.payload["condition"]
            )
            continue
        person = people.get(event.participant)
        if person is None:
            raise MalformedLog(f"event for unknown participant {event.participant!r}")
        if event.kind == "assigned":
            person.assigned = True
        elif event.kind == "story-chosen":
            person.story = event.payload["story"]
        elif event.kind in ("round-opened", "attempt") and event.round >= 1:
            person.opened.add(event.round)
        elif event.kind == "round-passed" and event.round >= 1:
            person.opened.add(event.round)
            person.passed.add(event.round)
        elif event.kind == "round-failed" and event.round >= 1:
            person.opened.add(event.round)
        elif event.kind == "survey":
            answers = event.payload.get("answers", {})
            if answers.get("read_or_watched") is False:
                person.excluded = True
    return people


def compute_metrics(
    events,
    condition: str | None = None,
    story: str | None = None,
    rounds: int = 6,
    include_excluded: bool = False,
) -> MetricsTable:
    people = [
        p
        for p in _trajectories(events).values()
        if p.assigned
        and (condition is None or p.condition == condition)
        and (story is None or p.story == story)
        and (include_excluded or not p.excluded)
    ]

    def ratio(num, den):
        return 100.0 * num / den if den else 0.0

    rows = []
    for i in range(1, rounds + 1):
        present = [p for p in people if i in p.opened]
        participants = len(present)
        remembered = sum(1 for p in present if i in p.passed)
        returned_ok = sum(
            1 for p in present if i == 1 or (i - 1) in p.passed
        )
        survived = sum(
            1 for p in present if all(j in p.passed for j in range(1, i + 1))
        )
        successful = (
            sum(
                1
                for p in present
                if (i - 1) in p.opened and (i - 1) not in p.passed and i in p.passed
            )
            if i >= 2
            else None
        )
        if i == 1:
            prev_present = len(people)
        else:
            prev_present = sum(1 for p in people if (i - 1) in p.opened)
        dropout = prev_present - participants
        rows.append(
            MetricsRow(
                i=i,
                participants=participants,
                num_successful_returned=returned_ok,
                num_remembered=remembered,
                num_survived=survived,
                num_successful=successful,
                dropout=dropout,
                success_rate=ratio(remembered, participants),
                failure_rate=ratio(participants - remembered, participants),
                conditional_survival=ratio(survived, returned_ok),
            )
        )
    return MetricsTable(participants0=len(people), rows=rows)


def typo_report(events, provider=None, include_excluded: bool = True) -> dict:
    """Per-story bucket counts over every incorrect attempt (Table-8 shape)."""
    provider = provider or DefaultEmbeddingProvider()
    people = _trajectories(events)
    assignments: dict[str, str] = {}
    report: dict[str, dict[str, int]] = {}
    for event in events:
        if event.kind == "assigned":
            assignments[event.participant] = " ".join(event.payload["words"])
        elif event.kind == "attempt" and not event.payload.get("correct", False):
            person = people.get(event.participant)
            if person is None or person.story is None:
                continue
            if not include_excluded and person.excluded:
                continue
            assigned = assignments.get(event.participant)
            if not assigned:
                continue
            _, bucket = bucket_attempt(assigned, event.payload["text"], provider)
            report.setdefault(person.story, {})[bucket] = (
                report.get(person.story, {}).get(bucket, 0) + 1
            )
    return report


def survey_aggregates(events) -> dict:
    agg: dict[str, dict] = {
        key: {str(v): 0 for v in range(1, 6)} for key in SURVEY_AGREEMENT_KEYS
    }
    for key in SURVEY_STORY_KEYS:
        agg[key] = {"yes": 0, "no": 0}
    for event in events:
        if event.kind != "survey":
            continue
        answers = event.payload.get("answers", {})
        for key in SURVEY_AGREEMENT_KEYS:
            if key in answers:
                agg[key][str(answers[key])] += 1
        for key in SURVEY_STORY_KEYS:
            if key in answers:
                agg[key]["yes" if answers[key] else "no"] += 1
    return agg
