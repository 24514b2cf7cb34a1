"""Project configuration: pivot, targets, resources, parameters."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .align import CostParams
from .errors import ConfigError


@dataclass(frozen=True)
class TargetSpec:
    label: str
    lang: str
    script: str
    path: Path


@dataclass(frozen=True)
class ProjectConfig:
    root: Path
    pivot_path: Path
    pivot_lang: str
    pivot_script: str
    workspace: Path
    targets: tuple[TargetSpec, ...]
    grammar_path: Path
    lexicon_dir: Path
    rules_paths: dict[str, Path] = field(default_factory=dict)
    translit_paths: dict[str, Path] = field(default_factory=dict)
    inflect_paths: dict[str, Path] = field(default_factory=dict)
    np_lexicon_path: Path | None = None
    cost_params: CostParams = field(default_factory=CostParams)
    theta: float = 0.34
    hypertype_overrides: dict[str, str] = field(default_factory=dict)

    def target(self, label: str) -> TargetSpec:
        for t in self.targets:
            if t.label == label:
                return t
        raise ConfigError(f"unknown target label {label!r}")


def load_config(path, workspace_override=None) -> ProjectConfig:
    """Parse the INI project file; validate labels and file existence."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep case of labels and language codes
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    root = path.parent

    def resolve(value: str) -> Path:
        if value.startswith("pkg:"):
            # shipped default resources (requires a filesystem install)
            return Path(str(importlib_resources.files("nomina") / "resources" / value[4:]))
        p = Path(value)
        return p if p.is_absolute() else root / p

    try:
        project = parser["project"]
        pivot_path = resolve(project["pivot"])
        pivot_lang = project["lang"]
    except KeyError as exc:
        raise ConfigError(f"missing [project] key: {exc}") from exc
    pivot_script = project.get("script", "latin")
    workspace = Path(workspace_override) if workspace_override else resolve(
        project.get("workspace", "workspace")
    )

    targets: list[TargetSpec] = []
    if parser.has_section("targets"):
        for label, value in parser["targets"].items():
            parts = value.split(None, 2)
            if len(parts) != 3:
                raise ConfigError(
                    f"target {label!r} must be 'lang script path', got {value!r}"
                )
            lang, script, tpath = parts
            targets.append(TargetSpec(label, lang, script, resolve(tpath)))
    labels = [t.label for t in targets]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate target labels in {labels}")

    resources = parser["resources"] if parser.has_section("resources") else {}
    if "grammars" not in resources or "lexicons" not in resources:
        raise ConfigError("[resources] must name 'grammars' and 'lexicons'")
    grammar_path = resolve(resources["grammars"])
    lexicon_dir = resolve(resources["lexicons"])
    np_lexicon_path = (
        resolve(resources["nplexicon"]) if "nplexicon" in resources else None
    )
    rules_paths: dict[str, Path] = {}
    translit_paths: dict[str, Path] = {}
    inflect_paths: dict[str, Path] = {}
    for key, value in resources.items():
        if key.startswith("rules."):
            rules_paths[key.split(".", 1)[1]] = resolve(value)
        elif key.startswith("translit."):
            translit_paths[key.split(".", 1)[1]] = resolve(value)
        elif key.startswith("inflect."):
            inflect_paths[key.split(".", 1)[1]] = resolve(value)

    kwargs = {}
    if parser.has_section("align"):
        align = parser["align"]
        mapping = {
            "c": "mean_ratio", "s2": "variance",
            "prior_11": "prior_11", "prior_12": "prior_12", "prior_21": "prior_21",
            "omission": "omission_penalty", "cognate_bonus": "cognate_bonus",
            "anchor_bonus": "anchor_bonus",
        }
        for key, attr in mapping.items():
            if key in align:
                kwargs[attr] = float(align[key])
        if "min_cognate_len" in align:
            kwargs["min_cognate_length"] = int(align["min_cognate_len"])
    cost_params = CostParams(**kwargs)

    theta = 0.34
    if parser.has_section("classify") and "theta" in parser["classify"]:
        theta = float(parser["classify"]["theta"])

    hypertype_overrides: dict[str, str] = {}
    if parser.has_section("hypertypes"):
        hypertype_overrides = dict(parser["hypertypes"].items())

    config = ProjectConfig(
        root=root,
        pivot_path=pivot_path,
        pivot_lang=pivot_lang,
        pivot_script=pivot_script,
        workspace=workspace,
        targets=tuple(targets),
        grammar_path=grammar_path,
        lexicon_dir=lexicon_dir,
        rules_paths=rules_paths,
        translit_paths=translit_paths,
        inflect_paths=inflect_paths,
        np_lexicon_path=np_lexicon_path,
        cost_params=cost_params,
        theta=theta,
        hypertype_overrides=hypertype_overrides,
    )

    missing = [
        str(p)
        for p in [config.pivot_path, config.grammar_path, config.lexicon_dir,
                  *(t.path for t in config.targets),
                  *config.rules_paths.values(), *config.translit_paths.values(),
                  *config.inflect_paths.values()]
        + ([config.np_lexicon_path] if config.np_lexicon_path else [])
        if not Path(p).exists()
    ]
    if missing:
        raise ConfigError("missing files: " + ", ".join(missing))
    return config
