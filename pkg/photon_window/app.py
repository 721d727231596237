"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import os
from typing import Any, Optional

import typer
from singleton_decorator import singleton
from typer import Typer

from .config.settings import Settings


@singleton
class Application:
    """Singleton Application class."""

    def __init__(self) -> None:
        """Constructor."""
        self.commands = Typer(
            help="Photon Window: first-photon statistics of rf-driven "
            "single molecules."
        )
        self.settings = Settings.parse_obj({})

    def register_api(self, api: Any) -> None:
        """Register an API with the application.

        Commands of the API are mounted directly on the top-level command
        group, so `photon-window sweep` rather than `photon-window api sweep`.

        Args:
            api: An API class to register.

        Returns:
            None.
        """
        try:
            registered = api.commands.registered_commands
        except AttributeError as e:
            typer.echo(e)
            return
        known = {info.name for info in self.commands.registered_commands}
        for info in registered:
            if info.name not in known:
                self.commands.registered_commands.append(info)

    def echo(self, *args: Any, **kwargs: Any) -> Any:
        """Print a message using Typer/Click echo.

        Args:
            *args: Positional arguments.
            **kwargs: Keyword arguments.

        Returns:
            Any: The return value from Typer.echo.
        """
        return typer.echo(*args, **kwargs)

    def jobs(self, requested: Optional[int] = None) -> int:
        """Number of parallel workers for a sweep.

        The `jobs` setting (and hence PHOTON_WINDOW_JOBS) takes precedence
        over the requested value, which in turn defaults to the available
        parallelism.

        Args:
            requested: Worker count asked for on the command line.

        Returns:
            int: Worker count, at least one.
        """
        jobs = self.settings.jobs or requested or os.cpu_count() or 1
        return max(1, int(jobs))

    def main(self) -> Any:
        """Main command line entrypoint.

        Returns:
            Any: The return value from running Typer commands.
        """
        return self.commands()


app = Application()
