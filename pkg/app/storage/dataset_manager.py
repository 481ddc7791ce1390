from abc import ABC, abstractmethod
from typing import Dict, List, Optional

from app.domain.models import (
    CountyRecord,
    GaugeSeries,
    GriddedField,
    PlantRecord,
    StateThresholds,
    ValidationReport,
)


class DatasetManager(ABC):
    """
    Abstract base class for access to one input dataset.
    """

    @abstractmethod
    def validate(self) -> ValidationReport:
        """Schema, range and referential checks over every file; never raises for data problems."""
        pass

    @abstractmethod
    def get_fields(self, scenario: Optional[str] = None) -> List[GriddedField]:
        """All gridded fields, optionally restricted to one scenario."""
        pass

    @abstractmethod
    def get_counties(self) -> List[CountyRecord]:
        pass

    @abstractmethod
    def get_national(self) -> Dict[int, float]:
        """National population reference by year (empty when not provided)."""
        pass

    @abstractmethod
    def get_gauges(self) -> List[GaugeSeries]:
        pass

    @abstractmethod
    def get_plants(self) -> List[PlantRecord]:
        pass

    @abstractmethod
    def get_thresholds(self) -> StateThresholds:
        """Dataset threshold table, or the bundled one."""
        pass
