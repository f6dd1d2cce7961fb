"""
On-disk cache of configuration dictionaries (numpy ``.npz`` archives).
"""

import logging
from typing import Optional
from pathlib import Path

import numpy as np

from ..robot import BasePose, ArmConfig
from ..errors import DictionaryMismatch
from .analysis import ConfigRecord, ConfigDictionary
from ..geometry import Pose

LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_dictionary(path: Path, dictionary: ConfigDictionary) -> None:
    records = dictionary.records
    visible = [x.visible for x in records]
    np.savez_compressed(
        path,
        version=np.array(FORMAT_VERSION),
        params_hash=np.array(dictionary.params_hash),
        model_resolution=np.array(dictionary.model_resolution),
        n_samples=np.array(dictionary.n_samples),
        analysis_time_per_base=np.array(dictionary.analysis_time_per_base),
        bases=np.array([tuple(x) for x in dictionary.bases], dtype=float).reshape(-1, 3),
        base_of=np.array(dictionary.base_of, dtype=np.int64),
        arms=np.array([x.arm.joints for x in records], dtype=float).reshape(-1, 6),
        cameras=np.array(
            [np.concatenate((x.camera.quaternion, x.camera.translation)) for x in records],
            dtype=float,
        ).reshape(-1, 7),
        visible=np.concatenate(visible).astype(np.int64) if visible else np.zeros(0, np.int64),
        visible_counts=np.array([len(x) for x in visible], dtype=np.int64),
    )
    LOGGER.info("Saved %d views to %s", len(records), path)


def load_dictionary(path: Path, expected_hash: Optional[str] = None) -> ConfigDictionary:
    """
    Read a dictionary written by `save_dictionary`. When `expected_hash` is
    given the stored dictionary must have been built from the same inputs.
    """
    with np.load(path) as archive:
        version = int(archive['version'])
        if version != FORMAT_VERSION:
            raise DictionaryMismatch("Unsupported dictionary format {} in {}".format(
                version,
                path,
            ))

        stored_hash = str(archive['params_hash'])
        if expected_hash is not None and stored_hash != expected_hash:
            raise DictionaryMismatch(
                "Dictionary {} was built for different inputs ({:.12} != {:.12})".format(
                    path,
                    stored_hash,
                    expected_hash,
                ),
            )

        bases = tuple(BasePose(*row) for row in archive['bases'])
        base_of = tuple(int(x) for x in archive['base_of'])
        offsets = np.concatenate(([0], np.cumsum(archive['visible_counts'])))
        visible = archive['visible']

        records = tuple(
            ConfigRecord(
                base=bases[base],
                arm=ArmConfig.of(arm),
                camera=Pose(camera[:4], camera[4:]),
                visible=visible[offsets[index]:offsets[index + 1]].copy(),
            )
            for index, (base, arm, camera) in enumerate(
                zip(base_of, archive['arms'], archive['cameras']),
            )
        )

        return ConfigDictionary(
            bases=bases,
            records=records,
            base_of=base_of,
            model_resolution=float(archive['model_resolution']),
            n_samples=int(archive['n_samples']),
            analysis_time_per_base=float(archive['analysis_time_per_base']),
            params_hash=stored_hash,
        )
