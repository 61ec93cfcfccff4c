"""Ordered parallel map over independent grid cells."""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Apply ``func`` to every item, returning results in input order.

    Args:
        func: Pure function of one grid cell
        items: Cells to evaluate
        threads: Worker count; 1 evaluates serially in the calling thread

    Returns:
        List[R]: One result per item, in the order of ``items``

    Raises:
        ValueError: If threads < 1
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    items = list(items)
    if threads == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
