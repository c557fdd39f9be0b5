import json
import os
import sys
import pytest
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from corpus_io.manifest import read_manifest
from corpus_io.raw_file import RawFile
from main import EXIT_PARSE, EXIT_SHORTFALL, EXIT_USAGE, main
from metrics.report import read_report

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')
BABI = os.path.join(FIXTURES, 'babi_task5_excerpt.txt')
SMD = os.path.join(FIXTURES, 'smd_excerpt.json')
CANDIDATES = os.path.join(FIXTURES, 'babi_candidates.txt')
PUBLISHED = os.path.abspath(os.path.join(os.path.dirname(__file__), '../data/published_reports'))

SMALL_BABI_PLAN = """\
dataset: babi
seed: 3
targets:
  open_request_screening: 1
  capability_expansion: 2
"""


@pytest.fixture
def babi_plan(tmp_path):
    path = tmp_path / 'plan.yaml'
    path.write_text(SMALL_BABI_PLAN, encoding='utf-8')
    return str(path)


def _inject(output, config, *extra):
    return main(['inject', '--format', 'babi', '--input', BABI, '--config', config, '--output', str(output), *extra])


def test_inject_is_reproducible_across_jobs(tmp_path, babi_plan):
    first, second = tmp_path / 'a' / 'updated.txt', tmp_path / 'b' / 'updated.txt'
    assert _inject(first, babi_plan, '--jobs', '1') == 0
    assert _inject(second, babi_plan, '--jobs', '3') == 0
    for suffix in ('', '.origin', '.manifest.tsv', '.plan.tsv'):
        assert RawFile.read(f'{first}{suffix}').data == RawFile.read(f'{second}{suffix}').data

    record_a = json.loads((tmp_path / 'a' / 'updated.txt.run.json').read_text(encoding='utf-8'))
    record_b = json.loads((tmp_path / 'b' / 'updated.txt.run.json').read_text(encoding='utf-8'))
    assert record_a['subcommand'] == 'inject'
    assert record_a['seed'] == 3
    assert record_a['config'] == record_b['config']
    assert sorted(record_a['outputs'].values()) == sorted(record_b['outputs'].values())
    assert record_a['notes']['per_pattern_counts'] == {'open_request_screening': 1, 'capability_expansion': 2}


def test_seed_flag_overrides_the_config(tmp_path, babi_plan):
    assert _inject(tmp_path / 'out.txt', babi_plan, '--seed', '11') == 0
    record = json.loads((tmp_path / 'out.txt.run.json').read_text(encoding='utf-8'))
    assert record['seed'] == 11
    assert record['config']['plan_config']['seed'] == 11


def test_missing_format_is_a_usage_error(tmp_path, babi_plan):
    with pytest.raises(SystemExit) as err:
        main(['inject', '--input', BABI, '--config', babi_plan, '--output', str(tmp_path / 'x.txt')])
    assert err.value.code == EXIT_USAGE


def test_shortfall_exits_3_unless_allowed(tmp_path):
    plan = tmp_path / 'short.yaml'
    plan.write_text('dataset: babi\ntargets:\n  sequence_closer_not_helped: 2\n', encoding='utf-8')
    assert _inject(tmp_path / 'out.txt', str(plan)) == EXIT_SHORTFALL
    assert not (tmp_path / 'out.txt').exists()
    assert _inject(tmp_path / 'out.txt', str(plan), '--allow-shortfall') == 0
    record = json.loads((tmp_path / 'out.txt.run.json').read_text(encoding='utf-8'))
    assert record['notes']['shortfalls'] == [
        {'pattern': 'sequence_closer_not_helped', 'target': 2, 'eligible': 1}
    ]


def test_preset_for_another_dataset_is_rejected(tmp_path):
    code = main(['inject', '--format', 'babi', '--input', BABI, '--preset', 'smd-table1',
                 '--output', str(tmp_path / 'x.txt')])
    assert code == EXIT_USAGE


def test_bundled_preset_runs_with_allow_shortfall(tmp_path):
    output = tmp_path / 'smd_updated.json'
    code = main(['inject', '--format', 'smd', '--input', SMD, '--preset', 'smd-table1',
                 '--allow-shortfall', '--output', str(output)])
    assert code == 0
    record = json.loads((tmp_path / 'smd_updated.json.run.json').read_text(encoding='utf-8'))
    assert record['notes']['shortfalls']
    assert record['config']['preset'] == 'smd-table1'


def test_ablate_writes_one_corpus_per_pattern(tmp_path):
    code = main(['ablate', '--format', 'smd', '--input', SMD, '--preset', 'smd-table1', '--allow-shortfall',
                 '--pattern', 'capability_expansion', '--pattern', 'recipient_correction',
                 '--output', str(tmp_path)])
    assert code == 0
    assert (tmp_path / 'smd_excerpt.capability_expansion.json').exists()
    assert (tmp_path / 'smd_excerpt.recipient_correction.json.run.json').exists()


def test_ablate_rejects_unknown_and_inapplicable_patterns(tmp_path):
    base = ['ablate', '--format', 'smd', '--input', SMD, '--preset', 'smd-table1', '--output', str(tmp_path)]
    assert main(base + ['--pattern', 'summons_user']) == EXIT_USAGE
    assert main(base + ['--pattern', 'open_request_user_detail_request']) == EXIT_USAGE
    assert list(tmp_path.iterdir()) == []


def _export_manifest(tmp_path):
    path = tmp_path / 'manifest.tsv'
    assert main(['manifest', '--format', 'babi', '--input', BABI, '--output', str(path)]) == 0
    return path, read_manifest(RawFile.read(path))


def test_eval_of_gold_predictions(tmp_path):
    manifest_path, manifest = _export_manifest(tmp_path)
    predictions = tmp_path / 'preds.txt'
    predictions.write_text(''.join(f'{e.gold_text}\n' for e in manifest.entries), encoding='utf-8')
    report_path = tmp_path / 'report.txt'
    code = main(['eval', '--predictions', str(predictions), '--manifest', str(manifest_path),
                 '--corpus', BABI, '--format', 'babi', '--label', 'gold', '--output', str(report_path)])
    assert code == 0
    report = read_report(RawFile.read(report_path).text())
    assert report.bleu == pytest.approx(100.0)
    assert report.entity_f1 == pytest.approx(1.0)
    assert report.per_dialog_acc == pytest.approx(1.0)
    assert report.label == 'gold'
    assert report.n_responses == 35


def test_eval_rejects_misaligned_predictions(tmp_path):
    manifest_path, manifest = _export_manifest(tmp_path)
    predictions = tmp_path / 'preds.txt'
    predictions.write_text('hello\n' * (len(manifest) - 1), encoding='utf-8')
    assert main(['eval', '--predictions', str(predictions), '--manifest', str(manifest_path)]) == EXIT_PARSE


def test_unparseable_corpus_exits_2(tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('[{"dialogue": [}', encoding='utf-8')
    assert main(['stats', '--format', 'smd', '--input', str(broken)]) == EXIT_PARSE


def test_compare_published_reports(capsys):
    code = main(['compare', '--original', os.path.join(PUBLISHED, 'glmp_smd_test.txt'),
                 '--updated', os.path.join(PUBLISHED, 'glmp_smd_test_updated.txt')])
    assert code == 0
    out = capsys.readouterr().out
    assert 'Ent. F1' in out
    assert '62.0%' in out


def test_stats_and_patterns_print_to_stdout(capsys):
    assert main(['stats', '--format', 'babi', '--input', BABI]) == 0
    assert 'dialogs: 3' in capsys.readouterr().out
    assert main(['patterns']) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ['code', 'class', 'name', 'recipe']
    assert 'capability_expansion' in out


def test_review_reads_the_origin_sidecar(tmp_path, babi_plan, capsys):
    updated = tmp_path / 'updated.txt'
    assert _inject(updated, babi_plan) == 0
    capsys.readouterr()
    assert main(['review', '--format', 'babi', '--input', str(updated), '--fraction', '1.0']) == 0
    sheet = capsys.readouterr().out
    assert sheet.startswith('# Review sheet')
    assert '[+capability_expansion]' in sheet


def test_baseline_writes_aligned_predictions(tmp_path):
    output = tmp_path / 'baseline.txt'
    code = main(['baseline', '--format', 'babi', '--corpus', BABI, '--candidates', CANDIDATES,
                 '--out', str(output)])
    assert code == 0
    assert len(RawFile.read(output).text().splitlines()) == 35
    assert (tmp_path / 'baseline.txt.run.json').exists()


def test_baseline_original_vs_updated_end_to_end(tmp_path, babi_plan):
    updated = tmp_path / 'updated.txt'
    assert _inject(updated, babi_plan) == 0
    manifest_path, _ = _export_manifest(tmp_path)

    reports = {}
    for name, corpus, manifest in (('original', BABI, manifest_path),
                                   ('updated', str(updated), f'{updated}.manifest.tsv')):
        predictions = tmp_path / f'{name}.preds.txt'
        assert main(['baseline', '--format', 'babi', '--corpus', corpus, '--candidates', CANDIDATES,
                     '--manifest', str(manifest), '--out', str(predictions)]) == 0
        reports[name] = tmp_path / f'{name}.report.txt'
        assert main(['eval', '--predictions', str(predictions), '--manifest', str(manifest),
                     '--corpus', corpus, '--format', 'babi', '--label', f'TF-IDF {name}',
                     '--output', str(reports[name])]) == 0

    table_path = tmp_path / 'comparison.txt'
    assert main(['compare', '--original', str(reports['original']), '--updated', str(reports['updated']),
                 '--output', str(table_path)]) == 0
    lines = RawFile.read(table_path).text().splitlines()
    assert lines[0].split()[:5] == ['metric', 'TF-IDF', 'original', 'TF-IDF', 'updated']
    metrics = [line.split('  ')[0].strip() for line in lines[1:]]
    assert metrics == ['BLEU', 'Ent. F1', 'Per-response acc.', 'Per-dialog acc.', 'Scored responses']
    assert lines[-1].split() == ['Scored', 'responses', '35', '35']
    print('\n'.join(lines))
