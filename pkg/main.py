import argparse
import os
import sys
from dotenv import load_dotenv
load_dotenv()
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), 'src')))
from cli import commands
from corpus_io.formats import FORMATS
from errors import AlignmentError, CorpusParseError, PlanShortfallError
from logging_utils.logger import setup_logger
from metrics.entity_f1 import ENTITY_SCOPES

# Exit codes: 0 ok, 1 usage or bad configuration, 2 unparseable or misaligned input, 3 plan shortfall
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_SHORTFALL = 3


class UsageExitParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; 2 is reserved for parse errors here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _corpus_flags(p, input_flag='--input', required_format=True):
    p.add_argument('--format', choices=FORMATS, required=required_format, help='Corpus format')
    p.add_argument(input_flag, required=True, help='Corpus file')
    p.add_argument('--origin', help='bAbI origin sidecar (default: <input>.origin when present)')


def _plan_flags(p):
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--preset', help='Bundled plan preset, e.g. smd-table1 or babi-table1')
    source.add_argument('--config', help='Plan config YAML file')
    p.add_argument('--seed', type=int, help='Overrides the seed of the plan config')
    p.add_argument('--allow-shortfall', action='store_true', help='Cap targets at eligibility instead of failing')
    p.add_argument('--jobs', type=int, help='Worker threads (default: NCF_JOBS or 1); never changes outputs')


def build_parser():
    parser = UsageExitParser(description="Inject natural conversation patterns into task-oriented dialog test sets.")
    sub = parser.add_subparsers(dest='command', required=True, parser_class=UsageExitParser)

    p = sub.add_parser('inject', help='Plan and inject patterns, writing an updated corpus')
    _corpus_flags(p)
    _plan_flags(p)
    p.add_argument('--output', required=True, help='Updated corpus path; sidecars are written next to it')
    p.set_defaults(func=commands.cmd_inject)

    p = sub.add_parser('ablate', help='One updated corpus per pattern')
    _corpus_flags(p)
    _plan_flags(p)
    which = p.add_mutually_exclusive_group()
    which.add_argument('--pattern', action='append', help='Pattern to ablate (repeatable)')
    which.add_argument('--all', action='store_true', help='Every pattern with a recipe for this format')
    p.add_argument('--output', required=True, help='Output directory')
    p.set_defaults(func=commands.cmd_ablate)

    p = sub.add_parser('stats', help='Per-pattern counts, overlap histogram and utterance means')
    _corpus_flags(p)
    p.add_argument('--preset', help='Compare against the targets of a preset')
    p.add_argument('--output', help='Write to a file instead of stdout')
    p.set_defaults(func=commands.cmd_stats)

    p = sub.add_parser('manifest', help='Export the evaluation manifest of a corpus')
    _corpus_flags(p)
    p.add_argument('--corpus-tag', help='Tag recorded in the manifest header (default: the format)')
    p.add_argument('--output', help='Write to a file instead of stdout')
    p.set_defaults(func=commands.cmd_manifest)

    p = sub.add_parser('eval', help='Score predictions against a manifest')
    p.add_argument('--predictions', required=True, help='One predicted response per line')
    p.add_argument('--manifest', required=True, help='Manifest TSV')
    p.add_argument('--corpus', help='Corpus providing the KBs for Entity F1')
    p.add_argument('--format', choices=FORMATS, help='Format of --corpus')
    p.add_argument('--origin', help='bAbI origin sidecar of --corpus')
    p.add_argument('--entity-scope', choices=ENTITY_SCOPES, default='global', help='Entity lexicon scope')
    p.add_argument('--label', help='Label stored in the report')
    p.add_argument('--compare', help='Report to compare against (treated as the original)')
    p.add_argument('--output', help='Write to a file instead of stdout')
    p.set_defaults(func=commands.cmd_eval)

    p = sub.add_parser('compare', help='Original vs updated table of two reports')
    p.add_argument('--original', required=True, help='Report on the original test set')
    p.add_argument('--updated', required=True, help='Report on the updated test set')
    p.add_argument('--output', help='Write to a file instead of stdout')
    p.set_defaults(func=commands.cmd_compare)

    p = sub.add_parser('review', help='Sample updated dialogs for manual review')
    _corpus_flags(p)
    p.add_argument('--fraction', type=float, default=0.2, help='Share of updated dialogs to sample')
    p.add_argument('--seed', type=int, default=0, help='Sampling seed')
    p.add_argument('--output', help='Write to a file instead of stdout')
    p.set_defaults(func=commands.cmd_review)

    p = sub.add_parser('baseline', help='TF-IDF retrieval predictions')
    _corpus_flags(p, input_flag='--corpus')
    p.add_argument('--candidates', required=True, help='Candidate responses file')
    p.add_argument('--candidates-format', choices=FORMATS, help='Format of --candidates (default: --format)')
    p.add_argument('--manifest', help='Manifest to predict for (default: exported from --corpus)')
    p.add_argument('--output', '--out', dest='output', help='Predictions file (default: stdout)')
    p.set_defaults(func=commands.cmd_baseline)

    p = sub.add_parser('patterns', help='Print the pattern catalog')
    p.add_argument('--output', help='Write to a file instead of stdout')
    p.set_defaults(func=commands.cmd_patterns)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logger = setup_logger()
    try:
        return args.func(args)
    except PlanShortfallError as e:
        logger.error(str(e))
        return EXIT_SHORTFALL
    except (CorpusParseError, AlignmentError) as e:
        logger.error(str(e))
        return EXIT_PARSE
    except (ValueError, KeyError, OSError) as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
