#!/usr/bin/env python3
"""
Command line driver for cykit.

Reads JSON descriptions of presentations, functors, classes, cospans and
ribbon graphs, runs the requested computation and prints a report. Exit
codes: 0 pass, 1 definite failure, 2 input or integrity error, 3
inconclusive window.
"""

import argparse
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from cyduality import check_left_cy, check_right_cy, functional_from_names
from cykit_config import get_settings, parse_window
from dgcore import (
    BUILTINS, DgPresentation, FiniteDgCategory, coef_from_json, compile, laurent, path_category,
    presentation_from_json, presentation_to_json, sphere_cell,
)
from errors import CykitError, RefusalError, SchemaError, WindowError
from exactla import GF, QQ
from fukaya import (
    SurfaceSpec, builtin_surface, check_surface, graph_from_json, graph_to_json, hom_table, state_sum,
    state_sum_presentation,
)
from glue import (
    compose_cospans, cospan_from_json, cospan_to_json, disk_cospan, identity_cospan, localize, reverse_cospan,
)
from hochschild import class_from_json, class_to_json, chain_from_json, hc_minus_dims, hh, hh_per_weight
from monitoring import log_error, logger, metrics_snapshot, set_log_level
from relcy import (
    canonical_relative_class, check_relative_left_cy, functor_from_json, relative_class_from_json, standard_functor,
)

VERDICT_EXIT = {True: 0, False: 1, None: 3}
BUILTIN_PATTERN = re.compile(r'^builtin:([a-z_]+?)(-?\d+)?$')
PRESENTATIONS = dict(BUILTINS, A=path_category, laurent=laurent, sphere_cell=sphere_cell)


@dataclass
class JobConfig:
    """One command line invocation."""
    command: str
    inputs: List[str]
    field: str = 'rational'
    window: Optional[Tuple[int, int]] = None
    weight_window: Optional[Tuple[int, int]] = None
    u_order: Optional[int] = None
    output_format: str = 'text'
    threads: Optional[int] = None
    output: Optional[str] = None
    options: Dict[str, object] = dc_field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'JobConfig':
        common = {'command', 'inputs', 'field', 'window', 'weight_window', 'u_order', 'format', 'threads',
                  'output', 'log_level', 'stats', 'handler'}
        return cls(
            command=args.command,
            inputs=list(getattr(args, 'inputs', None) or []),
            field=args.field,
            window=args.window,
            weight_window=args.weight_window,
            u_order=args.u_order,
            output_format=args.format,
            threads=args.threads,
            output=args.output,
            options={k: v for k, v in vars(args).items() if k not in common},
        )

    def scalar_field(self):
        if self.field == 'rational':
            return QQ
        try:
            return GF(int(self.field))
        except ValueError as e:
            raise RefusalError("config", f"field must be 'rational' or a prime, got {self.field!r}") from e

    def apply(self) -> None:
        """Export the overrides so that get_settings() sees them."""
        if self.window is not None:
            os.environ['CYKIT_DEFAULT_WINDOW'] = f"{self.window[0]}:{self.window[1]}"
        if self.weight_window is not None:
            os.environ['CYKIT_WEIGHT_WINDOW'] = f"{self.weight_window[0]}:{self.weight_window[1]}"
        if self.u_order is not None:
            os.environ['CYKIT_U_ORDER'] = str(self.u_order)
        if self.threads is not None:
            os.environ['CYKIT_THREADS'] = str(self.threads)
        if self.field == 'rational':
            os.environ.pop('CYKIT_PRIME', None)
        else:
            self.scalar_field()
            os.environ['CYKIT_PRIME'] = self.field


# ---------------------------------------------------------------------------
# input

def read_json(path: str):
    try:
        with open(path, encoding='utf-8') as fh:
            return json.load(fh)
    except OSError as e:
        raise SchemaError(path, f"cannot read file: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise SchemaError(path, f"invalid JSON: {e.msg} at line {e.lineno}") from e


def load_presentation(path: str) -> DgPresentation:
    """A presentation file, or ``builtin:NAME[ARG]`` such as builtin:A3 or builtin:laurent1."""
    m = BUILTIN_PATTERN.match(path)
    if m:
        name, arg = m.group(1), m.group(2)
        if name not in PRESENTATIONS:
            raise SchemaError(path, f"unknown builtin presentation {name!r}")
        return PRESENTATIONS[name](int(arg)) if arg is not None else PRESENTATIONS[name]()
    return presentation_from_json(read_json(path), path)


def compile_for(p: DgPresentation, config: JobConfig) -> FiniteDgCategory:
    weighted = any(a.weight for a in p.arrows)
    return compile(p, degree_window=config.window, weight_window=get_settings().weight_window if weighted else None,
                   field=config.scalar_field())


def parse_scalar(text, field):
    try:
        q = Fraction(str(text))
    except (ValueError, ZeroDivisionError) as e:
        raise SchemaError('--scale', f"not an exact scalar: {text!r}") from e
    return field.from_pair(q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# commands

def cmd_hh(config: JobConfig) -> Tuple[dict, int]:
    C = compile_for(load_presentation(config.inputs[0]), config)
    report = {'schema': 1, 'command': 'hh', 'presentation': C.name, 'field': C.field.name}
    if C.weight_periodic:
        report['per_weight'] = {str(w): {str(n): d for n, d in sorted(h.items()) if d}
                                for w, h in sorted(hh_per_weight(C).items())}
        return report, 0
    entries = hh(C, config.window)
    report['hh'] = {str(n): {'dimension': e.dimension, 'unreliable': e.unreliable}
                    for n, e in sorted(entries.items()) if e.dimension or e.unreliable}
    if config.options.get('hc_minus'):
        dims = hc_minus_dims(C, config.window, config.u_order)
        report['hc_minus'] = {str(k): v for k, v in sorted(dims.dims.items()) if v}
        report['hc_minus_unstable'] = sorted(dims.unstable)
    return report, 0


def cmd_cy_check(config: JobConfig) -> Tuple[dict, int]:
    C = compile_for(load_presentation(config.inputs[0]), config)
    n = config.options.get('dimension')
    if config.options.get('right'):
        if n is None:
            raise RefusalError("cy-check", "--right needs --dimension")
        doc = read_json(config.inputs[1])
        if not isinstance(doc, dict):
            raise SchemaError(config.inputs[1], "expected an object of monomial values")
        values = {}
        for name, pair in doc.items():
            q = coef_from_json(pair, f"$.{name}")
            values[name] = C.field.from_pair(q.numerator, q.denominator)
        result = check_right_cy(C, functional_from_names(C, values), n)
    else:
        lift = class_from_json(C, read_json(config.inputs[1]), config.inputs[1])
        result = check_left_cy(C, lift, n)
    report = {'schema': 1, 'command': 'cy-check', 'presentation': C.name, 'report': result.to_json()}
    return report, VERDICT_EXIT[result.verdict]


def cmd_rel_cy_check(config: JobConfig) -> Tuple[dict, int]:
    standard = config.options.get('standard')
    if standard is not None:
        f = standard_functor(standard, config.scalar_field())
        rel = canonical_relative_class(f, parse_scalar(config.options.get('scale', '1'), f.source.field))
    else:
        if len(config.inputs) != 2:
            raise RefusalError("rel-cy-check", "expected a functor file and a relative class file")
        f = functor_from_json(read_json(config.inputs[0]), config.inputs[0], config.scalar_field())
        rel = relative_class_from_json(f, read_json(config.inputs[1]), config.inputs[1])
    result = check_relative_left_cy(f, rel, config.options.get('dimension'))
    report = {'schema': 1, 'command': 'rel-cy-check', 'functor': f.name, 'report': result.to_json()}
    return report, VERDICT_EXIT[result.verdict]


def _load_cospan(path: str, config: JobConfig):
    return cospan_from_json(read_json(path), path, config.scalar_field())


def _cospan_report(c, verify: bool) -> Tuple[dict, int]:
    report = {'schema': 1, 'command': 'glue', 'cospan': cospan_to_json(c)}
    if not verify:
        return report, 0
    result = c.verify()
    report['report'] = result.to_json()
    return report, VERDICT_EXIT[result.verdict]


def cmd_glue(config: JobConfig) -> Tuple[dict, int]:
    opts, field = config.options, config.scalar_field()
    action = opts['action']
    verify = bool(opts.get('verify'))
    scale = parse_scalar(opts.get('scale', '1'), field)
    if action == 'disk':
        return _cospan_report(disk_cospan(opts['n'], opts['split'], scale, field), verify)
    if action == 'identity':
        return _cospan_report(identity_cospan(opts['points'], opts.get('shift', 0), scale, field), verify)
    if action == 'reverse':
        return _cospan_report(reverse_cospan(_load_cospan(opts['cospan'], config)), verify)
    if action == 'compose':
        c1, c2 = _load_cospan(opts['first'], config), _load_cospan(opts['second'], config)
        witness = None
        if opts.get('witness'):
            boundary = compile(c1.right_presentation, field=field)
            witness = chain_from_json(boundary, read_json(opts['witness']), opts['witness'])
        return _cospan_report(compose_cospans(c1, c2, witness), verify)

    result = localize(_load_cospan(opts['cospan'], config), opts.get('points'), config.window)
    report = {
        'schema': 1,
        'command': 'glue',
        'presentation': presentation_to_json(result.presentation),
        'homology': {f"{x}->{y}": {str(k): v for k, v in sorted(h.items())}
                     for (x, y), h in sorted(result.homology.items())},
        'zero': result.is_zero,
        'notes': list(result.notes),
    }
    if result.negative_cyclic is not None:
        report['class'] = class_to_json(result.category, result.negative_cyclic)
    return report, 3 if result.no_homology else 0


def cmd_fukaya(config: JobConfig) -> Tuple[dict, int]:
    opts = config.options
    if opts.get('graph'):
        g = graph_from_json(read_json(opts['graph']), opts['graph'])
    elif opts.get('surface'):
        g = builtin_surface(SurfaceSpec(opts['surface'], tuple(opts.get('marks') or ()),
                                        tuple(opts.get('winding') or ())))
    else:
        raise RefusalError("fukaya", "give --surface or --graph")
    report = {'schema': 1, 'command': 'fukaya', 'graph': graph_to_json(g),
              'presentation': presentation_to_json(state_sum_presentation(g)[0])}
    try:
        ss = state_sum(g, config.weight_window, config.scalar_field())
        report['hom'] = {f"{x}->{y}": degrees for (x, y), degrees in sorted(hom_table(ss.category).items())}
        if not opts.get('check'):
            return report, 0
        result = check_surface(ss, parse_scalar(opts.get('scale', '1'), ss.category.field))
    except WindowError as e:
        report['inconclusive'] = e.reason
        return report, 3
    report['report'] = result.to_json()
    return report, VERDICT_EXIT[result.verdict]


# ---------------------------------------------------------------------------
# output

def render_text(report: dict, indent: int = 0) -> List[str]:
    lines = []
    pad = '  ' * indent
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(render_text(value, indent + 1))
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.extend(render_text(item, indent + 1))
        else:
            lines.append(f"{pad}{key}: {value}")
    return lines


def render(report: dict, output_format: str) -> str:
    if output_format == 'json':
        return json.dumps(report, sort_keys=True, indent=2) + '\n'
    return '\n'.join(render_text(report)) + '\n'


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.cykit-', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument parsing

def _window(text: str) -> Tuple[int, int]:
    try:
        return parse_window(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cykit', description="Exact Hochschild homology and Calabi-Yau checks")
    parser.add_argument("--field", default='rational', help="'rational' or a prime p")
    parser.add_argument("--window", type=_window, help="Cohomological degree window lo:hi")
    parser.add_argument("--weight-window", type=_window, help="Weight window lo:hi")
    parser.add_argument("--u-order", type=int, help="Number of u-orders for negative cyclic lifts")
    parser.add_argument("--threads", type=int, help="Parallelism cap (overrides CYKIT_THREADS)")
    parser.add_argument("--format", choices=['text', 'json'], default='text', help="Report format")
    parser.add_argument("--output", "-o", help="Write the report to this file instead of stdout")
    parser.add_argument("--log-level", default=os.environ.get('LOG_LEVEL', 'WARNING'), help="Logging level")
    parser.add_argument("--stats", action='store_true', help="Append timer statistics to the report")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('hh', help="Hochschild homology of a presentation")
    p.add_argument('inputs', nargs=1, metavar='PRESENTATION')
    p.add_argument('--hc-minus', action='store_true', help="Also report negative cyclic dimensions")
    p.set_defaults(handler=cmd_hh)

    p = sub.add_parser('cy-check', help="Absolute Calabi-Yau check")
    p.add_argument('inputs', nargs=2, metavar=('PRESENTATION', 'CLASS'))
    p.add_argument('--dimension', type=int)
    p.add_argument('--right', action='store_true', help="CLASS is a functional {monomial: [num, den]}")
    p.set_defaults(handler=cmd_cy_check)

    p = sub.add_parser('rel-cy-check', help="Relative left Calabi-Yau check")
    p.add_argument('inputs', nargs='*', metavar='FILE', help="Functor file and relative class file")
    p.add_argument('--standard', type=int, metavar='N', help="Use the A_N boundary functor and its canonical class")
    p.add_argument('--scale', default='1')
    p.add_argument('--dimension', type=int)
    p.set_defaults(handler=cmd_rel_cy_check)

    p = sub.add_parser('glue', help="Build, compose and localize Calabi-Yau cospans")
    actions = p.add_subparsers(dest='action', required=True)
    a = actions.add_parser('disk')
    a.add_argument('n', type=int)
    a.add_argument('split', type=int)
    a = actions.add_parser('identity')
    a.add_argument('points', nargs='+')
    a.add_argument('--shift', type=int, default=0)
    a = actions.add_parser('reverse')
    a.add_argument('cospan')
    a = actions.add_parser('compose')
    a.add_argument('first')
    a.add_argument('second')
    a.add_argument('--witness')
    a = actions.add_parser('localize')
    a.add_argument('cospan')
    a.add_argument('--points', nargs='*')
    for a in actions.choices.values():
        a.add_argument('--scale', default='1')
        a.add_argument('--verify', action='store_true')
    p.set_defaults(handler=cmd_glue)

    p = sub.add_parser('fukaya', help="State-sum Fukaya category of a framed surface")
    p.add_argument('--surface', choices=['disk', 'annulus', 'sphere', 'torus'])
    p.add_argument('--graph', help="Ribbon graph file for custom surfaces")
    p.add_argument('--marks', type=int, nargs='+')
    p.add_argument('--winding', type=int, nargs='+')
    p.add_argument('--check', action='store_true')
    p.add_argument('--scale', default='1')
    p.set_defaults(handler=cmd_fukaya)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    set_log_level(args.log_level)
    config = JobConfig.from_args(args)
    try:
        config.apply()
        report, code = args.handler(config)
    except CykitError as e:
        log_error(e, {'command': config.command})
        report, code = {'schema': 1, 'command': config.command, 'error': type(e).__name__,
                        'message': str(e)}, e.exit_code
    if args.stats:
        report['stats'] = metrics_snapshot()
    text = render(report, config.output_format)
    if config.output:
        write_atomic(config.output, text)
    else:
        sys.stdout.write(text)
    logger.debug("Command finished", command=config.command, exit_code=code)
    return code


if __name__ == '__main__':
    sys.exit(main())
