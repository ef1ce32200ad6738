"""
Backend contract shared by every translation engine adapter
"""
from abc import ABC, abstractmethod
from typing import List, Union

from app.schemas.translation import EngineDescriptor, TranslationFailure

BatchResult = List[Union[str, TranslationFailure]]


class TranslationBackend(ABC):
    """
    Ordered list of source lines in, equally long ordered list out.

    Per-line problems come back as TranslationFailure items. Problems that
    cannot be attributed to one line raise (BackendUnavailable,
    AlignmentError, AuthFailure).
    """

    def __init__(self, descriptor: EngineDescriptor, max_batch_size: int = 100):
        self.descriptor = descriptor
        self.max_batch_size = max_batch_size
        self.query_count = 0

    @abstractmethod
    async def translate_batch(self, lines: List[str]) -> BatchResult:
        ...

    async def aclose(self) -> None:
        return None
