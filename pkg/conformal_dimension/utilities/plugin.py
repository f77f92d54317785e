from __future__ import annotations

import dataclasses
import inspect
import logging
import typing as t

if t.TYPE_CHECKING:
    from ..runner import Runner, TaskOutcome

__all__ = ("Plugin", "PluginMetadata", "Task")

LOGGER = logging.getLogger(__name__)


TaskCallback = t.Callable[["Runner"], "TaskOutcome"]
Hook = t.Callable[["Runner"], None]
SetupFunc = t.Callable[["Runner"], None]


MAX_FRAME_DEPTH = 10


class TaskParams(t.TypedDict, total=False):
    name: str
    description: str
    extras: t.Dict[str, t.Any]


@dataclasses.dataclass
class PluginMetadata:
    name: str
    category: t.Optional[str] = None

    task_attrs: TaskParams = dataclasses.field(default_factory=TaskParams)


@dataclasses.dataclass(frozen=True)
class Task:
    name: str
    callback: TaskCallback
    description: str = ""
    extras: t.Mapping[str, t.Any] = dataclasses.field(default_factory=dict)

    def __call__(self, runner: Runner) -> TaskOutcome:
        return self.callback(runner)


def _get_source_module_name() -> str:
    try:
        frame = inspect.currentframe()
        for _ in range(MAX_FRAME_DEPTH):
            name = (frame := frame.f_back).f_globals["__name__"]  # type: ignore
            if name != __name__:
                return name

    except (AttributeError, KeyError):
        pass

    raise TypeError("Failed to infer a name for this plugin. Please provide one manually.")


class Plugin:
    """A bundle of tasks that a runner loads as one extension."""

    __slots__ = ("metadata", "tasks", "_pre_load_hooks", "_post_load_hooks")

    _pre_load_hooks: t.List[Hook]
    _post_load_hooks: t.List[Hook]

    def __init__(self, metadata: PluginMetadata):
        self.metadata = metadata
        self.tasks: t.Dict[str, Task] = {}

        self._pre_load_hooks = []
        self._post_load_hooks = []

    @classmethod
    def with_metadata(
        cls,
        *,
        name: t.Optional[str] = None,
        category: t.Optional[str] = None,
        task_attrs: t.Optional[TaskParams] = None,
    ) -> Plugin:
        return cls(
            PluginMetadata(
                name=name or _get_source_module_name(),
                category=category,
                task_attrs=task_attrs or TaskParams(),
            )
        )

    @property
    def name(self) -> str:
        return self.metadata.name

    @property
    def category(self) -> t.Optional[str]:
        return self.metadata.category

    def apply_attrs(self, attrs: t.Mapping[str, t.Any], **kwargs: t.Any) -> t.Dict[str, t.Any]:
        new_attrs = dict(attrs) | {k: v for k, v in kwargs.items() if v is not None}
        new_attrs.setdefault("extras", {})["metadata"] = self.metadata
        return new_attrs

    def task(
        self,
        name: t.Optional[str] = None,
        *,
        description: t.Optional[str] = None,
        **kwargs: t.Any,
    ) -> t.Callable[[TaskCallback], Task]:
        attributes = self.apply_attrs(
            self.metadata.task_attrs, name=name, description=description, **kwargs
        )

        def decorator(callback: TaskCallback) -> Task:
            if inspect.iscoroutinefunction(callback):
                raise TypeError(f"<{callback.__qualname__}> must be a regular function")

            task = Task(
                name=attributes.get("name") or callback.__name__,
                callback=callback,
                description=attributes.get("description") or inspect.getdoc(callback) or "",
                extras=attributes["extras"],
            )
            if task.name in self.tasks:
                raise ValueError(f"Plugin `{self.name}` already has a task `{task.name}`")
            self.tasks[task.name] = task

            return task

        return decorator

    def load(self, runner: Runner) -> None:
        for hook in self._pre_load_hooks:
            hook(runner)

        for task in self.tasks.values():
            runner.add_task(task)

        for hook in self._post_load_hooks:
            hook(runner)
        LOGGER.debug(f"Successfully loaded plugin `{self.metadata.name}`")

    def unload(self, runner: Runner) -> None:
        for name in self.tasks.keys():
            runner.remove_task(name)

        LOGGER.debug(f"Successfully unloaded plugin `{self.metadata.name}`")

    def load_hook(self, post: bool = False) -> t.Callable[[Hook], Hook]:
        hooks = self._post_load_hooks if post else self._pre_load_hooks

        def wrapper(callback: Hook) -> Hook:
            hooks.append(callback)
            return callback

        return wrapper

    def create_extension_handlers(self) -> t.Tuple[SetupFunc, SetupFunc]:
        def setup(runner: Runner) -> None:
            self.load(runner)

        def teardown(runner: Runner) -> None:
            self.unload(runner)

        return setup, teardown
