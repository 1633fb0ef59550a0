"""Cross-run instance grouping and consent-gated human re-ranking.

Instances from different runs that share exact (source, reference) text form
one group; members are listed best-first.  The comparator prefers the
annotation-derived score family (instructscore, then baseline) because that
is what the instance view foregrounds, then the comet family, then run name
for a deterministic total order.

Rankings are persisted only with consent, keyed by an opaque session token,
and a session can revoke everything it ever submitted.  Stored feedback never
mutates the computed ordering; it is a separate dataset.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import NotAPermutation, UnknownGroup
from .search import InstanceRecord

INSTRUCTSCORE_FAMILY = ("instructscore", "baseline")
COMET_FAMILY = ("comet",)


def group_key(source_text: str | None, reference_text: str | None) -> str:
    """Stable digest of the exact (source, reference) texts; absent text
    counts as empty."""
    payload = json.dumps([source_text or "", reference_text or ""],
                         ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class GroupMember:
    run_id: str
    run_name: str
    instance: object  # model.Instance
    scores: dict[str, float] = field(default_factory=dict)
    annotations: list = field(default_factory=list)


@dataclass
class InstanceGroup:
    key: str
    source_text: str
    reference_text: str
    members: list[GroupMember] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "group_key": self.key,
            "source": self.source_text,
            "reference": self.reference_text,
            "members": [{
                "run_id": m.run_id,
                "run_name": m.run_name,
                "instance": {
                    "id": m.instance.id,
                    "index": m.instance.index,
                    "source": m.instance.source_text,
                    "prediction": m.instance.prediction_text,
                    "reference": m.instance.reference_text,
                },
                "scores": dict(m.scores),
                "annotations": [dict(a.to_record(), id=a.id) for a in m.annotations],
            } for m in self.members],
        }


def _family_score(scores: dict[str, float], family: tuple[str, ...]) -> float | None:
    for name in family:
        if name in scores:
            return scores[name]
    return None


def member_sort_key(member: GroupMember):
    """Best-first: instructscore family desc, comet family desc, name asc;
    a missing family score sorts after any present one."""
    primary = _family_score(member.scores, INSTRUCTSCORE_FAMILY)
    secondary = _family_score(member.scores, COMET_FAMILY)
    return (
        (0, -primary) if primary is not None else (1, 0.0),
        (0, -secondary) if secondary is not None else (1, 0.0),
        member.run_name,
        member.run_id,
    )


def build_groups(records: list[InstanceRecord]) -> list[InstanceGroup]:
    """Partition instance records into groups, ordered by first appearance.

    ``records`` must already be in (run selection order, instance index)
    order; every record lands in exactly one group.
    """
    groups: dict[str, InstanceGroup] = {}
    order: list[str] = []
    for rec in records:
        inst = rec.instance
        key = group_key(inst.source_text, inst.reference_text)
        group = groups.get(key)
        if group is None:
            group = InstanceGroup(key=key,
                                  source_text=inst.source_text or "",
                                  reference_text=inst.reference_text or "")
            groups[key] = group
            order.append(key)
        group.members.append(GroupMember(
            run_id=rec.run_id, run_name=rec.run_name, instance=inst,
            scores=rec.scores, annotations=rec.annotations))
    out = [groups[k] for k in order]
    for group in out:
        group.members.sort(key=member_sort_key)
    return out


def check_ranking(group: InstanceGroup, ordering: list[str]) -> None:
    """Ordering must be a permutation of the group's member run ids."""
    member_runs = sorted(m.run_id for m in group.members)
    if sorted(ordering) != member_runs:
        raise NotAPermutation(
            "ordering must list each of the group's runs exactly once",
            expected=member_runs, got=list(ordering))


def find_group(groups: list[InstanceGroup], key: str) -> InstanceGroup:
    for group in groups:
        if group.key == key:
            return group
    raise UnknownGroup(f"no group {key!r} in the current run selection", group_key=key)
