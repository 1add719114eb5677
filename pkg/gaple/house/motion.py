"""Agent kinematics and shortest paths over the pose graph"""
from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Set

from ..models import Action, Heading, HouseLayout, Pose

UNREACHABLE = None


def step(layout: HouseLayout, pose: Pose, action: Action) -> Pose:
    """Apply one action; moving into a non-floor cell leaves the pose unchanged"""
    action = Action(action)
    if action is Action.ROTATE_LEFT:
        return Pose(pose.x, pose.y, pose.heading.left())
    if action is Action.ROTATE_RIGHT:
        return Pose(pose.x, pose.y, pose.heading.right())

    if action is Action.MOVE_FORWARD:
        direction = pose.heading
    elif action is Action.MOVE_BACKWARD:
        direction = Heading((pose.heading + 2) % 4)
    elif action is Action.STRAFE_LEFT:
        direction = pose.heading.left()
    else:
        direction = pose.heading.right()
    dx, dy = direction.vector
    nx, ny = pose.x + dx, pose.y + dy
    if layout.is_floor(nx, ny):
        return Pose(nx, ny, pose.heading)
    return pose


def reachable_poses(layout: HouseLayout) -> FrozenSet[Pose]:
    """
    Every pose reachable from some floor cell

    Rotations alone reach all four headings of a cell, so this is every floor
    cell paired with every heading.
    """
    return frozenset(Pose(x, y, h) for x, y in layout.floor_cells() for h in Heading)


def successors(layout: HouseLayout, pose: Pose) -> List[Pose]:
    return [step(layout, pose, a) for a in Action]


def min_steps(layout: HouseLayout, start: Pose, goals: Iterable[Pose]) -> Optional[int]:
    """Length of the shortest action sequence from start to any goal, or None"""
    goal_set = set(goals)
    if start in goal_set:
        return 0
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        pose, depth = frontier.popleft()
        for nxt in successors(layout, pose):
            if nxt in seen:
                continue
            if nxt in goal_set:
                return depth + 1
            seen.add(nxt)
            frontier.append((nxt, depth + 1))
    return UNREACHABLE


def distance_to_goals(layout: HouseLayout, goals: Iterable[Pose]) -> Dict[Pose, int]:
    """
    Steps-to-goal for every pose that can reach the goal set

    Breadth-first search from the goals over reversed transitions; poses
    missing from the result cannot reach any goal.
    """
    predecessors: Dict[Pose, Set[Pose]] = {}
    for pose in reachable_poses(layout):
        for nxt in successors(layout, pose):
            if nxt != pose:
                predecessors.setdefault(nxt, set()).add(pose)

    dist = {g: 0 for g in goals}
    frontier = deque(dist)
    while frontier:
        pose = frontier.popleft()
        for prev in sorted(predecessors.get(pose, ())):
            if prev not in dist:
                dist[prev] = dist[pose] + 1
                frontier.append(prev)
    return dist


def best_action(layout: HouseLayout, pose: Pose, dist: Dict[Pose, int]) -> Action:
    """Action that moves closest to the goal set (lowest index on ties)"""
    best, best_dist = Action.ROTATE_LEFT, None
    for action in Action:
        d = dist.get(step(layout, pose, action))
        if d is not None and (best_dist is None or d < best_dist):
            best, best_dist = action, d
    return best
