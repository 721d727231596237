"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from typing import Any

import yaml

from .app import app


class API:
    """Base class of the command groups."""

    @classmethod
    def register(cls) -> None:
        """Register the API with the application.

        Returns:
            None.
        """
        app.register_api(cls)

    @staticmethod
    def report(data: Any) -> None:
        """Print a command result as YAML, keys in insertion order.

        Args:
            data: A YAML-serializable result.
        """
        app.echo(yaml.dump(data, sort_keys=False), nl=False)
