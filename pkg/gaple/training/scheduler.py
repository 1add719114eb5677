"""
Work-stealing dispatch of environment-target pairs

Each worker owns a deque seeded round-robin with every pair. A worker pops
from the front of its own deque and, when that is empty, steals from the back
of the longest peer deque. A new round is dealt only after every deque has
drained, so the number of times any two pairs were handed out differs by at
most one.
"""
import logging
import threading
from collections import deque
from typing import Deque, List, Optional, Sequence

from .tasks import TaskPair

logger = logging.getLogger(__name__)


def steal_task(queues: Sequence[Deque[TaskPair]], self_id: int,
               locks: Optional[Sequence[threading.Lock]] = None) -> Optional[TaskPair]:
    """
    Take one task from the back of the longest other deque

    Ties go to the lowest worker id. Returns None when every other deque is empty.
    """
    while True:
        peers = [i for i in range(len(queues)) if i != self_id and queues[i]]
        if not peers:
            return None
        victim = max(peers, key=lambda i: (len(queues[i]), -i))
        if locks is None:
            return queues[victim].pop()
        with locks[victim]:
            if queues[victim]:
                return queues[victim].pop()


class WorkStealingScheduler:
    def __init__(self, pairs: Sequence[TaskPair], n_workers: int):
        if not pairs:
            raise ValueError('scheduler needs at least one pair')
        if n_workers < 1:
            raise ValueError(f'n_workers must be >= 1, got {n_workers}')
        self.pairs: List[TaskPair] = list(pairs)
        self.n_workers = n_workers
        self.queues: List[Deque[TaskPair]] = [deque() for _ in range(n_workers)]
        self._locks = [threading.Lock() for _ in range(n_workers)]
        self._deal_lock = threading.Lock()
        self.rounds = 0
        self.steals = 0
        self._deal()

    def _deal(self) -> None:
        for i, pair in enumerate(self.pairs):
            with self._locks[i % self.n_workers]:
                self.queues[i % self.n_workers].append(pair)
        self.rounds += 1
        logger.debug('dealt round %d of %d pairs over %d workers', self.rounds, len(self.pairs), self.n_workers)

    def _pop_own(self, worker_id: int) -> Optional[TaskPair]:
        with self._locks[worker_id]:
            if self.queues[worker_id]:
                return self.queues[worker_id].popleft()
        return None

    def next_task(self, worker_id: int) -> TaskPair:
        while True:
            pair = self._pop_own(worker_id)
            if pair is not None:
                return pair
            pair = steal_task(self.queues, worker_id, self._locks)
            if pair is not None:
                with self._deal_lock:
                    self.steals += 1
                return pair
            with self._deal_lock:
                if not any(self.queues):
                    self._deal()
