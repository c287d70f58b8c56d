"""
Order-preserving parallel execution of per-input tasks.

Tasks run on a thread pool up to ``max_workers``; results land in input
order regardless of completion order. Progress goes to a tqdm bar on
stderr, or to JSONL events when those are enabled.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Generic, List, Optional, Sequence, TypeVar

from tqdm import tqdm

from .events import EventEmitter

T = TypeVar("T")


@dataclass
class BatchResult(Generic[T]):
    """Results of a batch, in input order."""

    results: List[T] = field(default_factory=list)
    duration_seconds: float = 0.0

    @property
    def count(self) -> int:
        return len(self.results)


class BatchRunner:
    """Runs independent tasks and reports progress."""

    def __init__(self, emitter: EventEmitter, max_workers: int = 1, show_progress: bool = True,
                 description: str = "Certifying"):
        if max_workers < 1:
            raise ValueError(f"max_workers must be positive, got {max_workers}")
        self.emitter = emitter
        self.max_workers = max_workers
        self.show_progress = show_progress and not emitter.enabled
        self.description = description
        self._logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def run(self, tasks: Sequence[Callable[[], T]]) -> BatchResult[T]:
        """
        Run every task. If any fail, the exception of the lowest-index
        failing task is re-raised once all tasks have finished.
        """
        total = len(tasks)
        results: List[Optional[T]] = [None] * total
        failures = {}
        start = time.monotonic()
        self.emitter.info(f"{self.description} {total} inputs with {self.max_workers} workers",
                          data={"total": total, "max_workers": self.max_workers})

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor, \
                tqdm(total=total, desc=self.description, unit="input",
                     disable=not self.show_progress, leave=False) as pbar:
            future_to_index = {executor.submit(task): index for index, task in enumerate(tasks)}
            completed = 0
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    failures[index] = e
                    self.emitter.error(f"Input {index} failed: {e}", data={"index": index})
                    self._logger.debug("Task %d failed", index, exc_info=True)
                completed += 1
                pbar.update(1)
                self.emitter.progress(completed, total, f"{self.description}: {completed}/{total}")

        if failures:
            raise failures[min(failures)]
        duration = time.monotonic() - start
        self._logger.info("%s finished %d inputs in %.2fs", self.description, total, duration)
        return BatchResult(results=results, duration_seconds=duration)
