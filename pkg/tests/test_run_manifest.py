import json
import os

from modules import __version__
from modules.run_manifest import MANIFEST_NAME, generate_manifest, save_manifest, verify_manifest


def test_manifest_hashes_and_verification(tmp_path):
    data = tmp_path / 'X.csv'
    data.write_text('a\n1\n', encoding='utf-8')
    out = tmp_path / 'out'
    out.mkdir()
    table = out / 'summary.csv'
    table.write_text('parameter,mean\nbeta0,1.0\n', encoding='utf-8')

    manifest = generate_manifest('fit', {'seed': 1}, [str(data), None], [str(table)], str(out),
                                 {'fit': {'n': 1}})
    assert manifest['command'] == 'fit'
    assert list(manifest['outputs']) == ['summary.csv']
    assert list(manifest['inputs']) == [str(data)]
    assert manifest['system_info']['app_version'] == __version__
    assert manifest['fit'] == {'n': 1}
    assert verify_manifest(manifest)

    tampered = dict(manifest, config={'seed': 2})
    assert not verify_manifest(tampered)

    path = save_manifest(manifest, str(out))
    assert os.path.basename(path) == MANIFEST_NAME
    with open(path, encoding='utf-8') as f:
        assert verify_manifest(json.load(f))
