"""
ファイル管理モジュール
CSVの読み込み・書き出し、アトミックな書き込み、ハッシュ計算などの操作を提供
"""
import json
import logging
import os
import re
import tempfile
import hashlib
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

import config
from modules.errors import ConfigError, CsvParseError, DimensionError, UnsupportedOperationError
from modules.model import Dataset, Family
from modules.utils import ensure_directory

logger = logging.getLogger(__name__)

_PANDAS_LINE = re.compile(r'line (\d+)')


def _read_raw(filepath: str) -> pd.DataFrame:
    """
    CSVを文字列のまま読み込む（型変換は呼び出し側で行う）

    Raises:
        ConfigError: ファイルが見つからない場合
        CsvParseError: 列数が多すぎる行や空ファイル
    """
    if not os.path.isfile(filepath):
        raise ConfigError(f"入力ファイルが見つかりません: {filepath}")
    try:
        return pd.read_csv(filepath, dtype=str, keep_default_na=False,
                           encoding=config.CSV_ENCODING, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise CsvParseError("ファイルが空です（ヘッダー行が必要）", path=filepath) from None
    except pd.errors.ParserError as e:
        # pandasの行番号はヘッダーを含む1始まり
        match = _PANDAS_LINE.search(str(e))
        row = int(match.group(1)) - 1 if match else None
        raise CsvParseError(f"列数が一致しない行があります: {e}", path=filepath, row=row) from None
    except UnicodeDecodeError as e:
        raise CsvParseError(f"{config.CSV_ENCODING}として読み込めません: {e}", path=filepath) from None


def read_matrix_csv(filepath: str, allow_na: bool = False) -> Tuple[np.ndarray, List[str]]:
    """
    数値CSVを行列として読み込む

    Args:
        filepath: CSVファイルのパス（ヘッダー行必須）
        allow_na: NAトークンを欠測値（NaN）として許可するか

    Returns:
        (n×k の float 行列, 列名のリスト)

    Raises:
        CsvParseError: 列数の足りない行、数値でもNAでもないセル（行・列を含む）
    """
    frame = _read_raw(filepath)
    columns = [str(c) for c in frame.columns]
    cells = frame.to_numpy(dtype=object)
    out = np.empty(cells.shape, dtype=float)

    for (r, c), cell in np.ndenumerate(cells):
        # 列数の足りない行は pandas が NaN で埋める
        if not isinstance(cell, str):
            raise CsvParseError("列数が足りない行があります", path=filepath, row=r + 1, column=columns[c])
        text = cell.strip()
        if text == config.NA_TOKEN:
            if not allow_na:
                raise CsvParseError("このファイルでは欠測値は使用できません", path=filepath,
                                    row=r + 1, column=columns[c])
            out[r, c] = np.nan
            continue
        try:
            value = float(text)
        except ValueError:
            raise CsvParseError(f"数値ではないセル '{text}'", path=filepath,
                                row=r + 1, column=columns[c]) from None
        if not np.isfinite(value):
            raise CsvParseError(f"有限でない値 '{text}'", path=filepath, row=r + 1, column=columns[c])
        out[r, c] = value

    logger.debug(f"Read {out.shape[0]}x{out.shape[1]} matrix from {filepath}")
    return out, columns


def read_response_csv(filepath: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    応答変数 y を読み込む（NA は欠測として扱う）

    Returns:
        (y, missing_mask)

    Raises:
        DimensionError: 列数が1でない場合
    """
    values, columns = read_matrix_csv(filepath, allow_na=True)
    if values.shape[1] != 1:
        raise DimensionError(f"y.csv は1列である必要があります（{len(columns)}列）: {filepath}")
    y = values[:, 0]
    return y, np.isnan(y)


def load_dataset(x_path: str, z_path: Optional[str], y_path: str,
                 family: Family = Family.GAUSSIAN) -> Dataset:
    """
    X.csv・Z.csv・y.csv からデータセットを構築

    Args:
        x_path: 説明変数 X（n×p）
        z_path: 修飾変数 Z（n×q）。None の場合は q = 0
        y_path: 応答変数 y（n×1、NA可）
        family: gaussian または binomial

    Raises:
        DimensionError: 行数が一致しない場合
        UnsupportedOperationError: binomial で y に NA がある場合
    """
    X, x_names = read_matrix_csv(x_path)
    y, mask = read_response_csv(y_path)
    if z_path:
        Z, z_names = read_matrix_csv(z_path)
    else:
        Z, z_names = np.zeros((X.shape[0], 0)), []

    if not (X.shape[0] == Z.shape[0] == y.shape[0]):
        raise DimensionError(f"行数が一致しません: X={X.shape[0]}, Z={Z.shape[0]}, y={y.shape[0]}")
    family = Family(family)
    if family is Family.BINOMIAL and mask.any():
        raise UnsupportedOperationError(
            f"binomial では欠測した応答（NA）は扱えません: {int(mask.sum())}件")

    data = Dataset(X, Z, y, mask, family, tuple(x_names), tuple(z_names))
    logger.info(f"Loaded dataset: n={data.n}, p={data.p}, q={data.q}, missing={data.n_missing}")
    return data


def _atomic_target(filepath: str):
    directory = os.path.dirname(os.path.abspath(filepath))
    ensure_directory(directory)
    fd, tmp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    os.close(fd)
    return tmp_path


def _commit(tmp_path: str, filepath: str) -> None:
    os.chmod(tmp_path, 0o644)
    os.replace(tmp_path, filepath)
    logger.debug(f"Wrote {filepath}")


def write_csv(frame: pd.DataFrame, filepath: str, index: bool = False) -> str:
    """
    DataFrame をCSVとしてアトミックに書き出す（一時ファイル → rename）

    浮動小数点は完全精度で書き出し、欠測は NA トークンで表す。
    """
    tmp_path = _atomic_target(filepath)
    try:
        frame.to_csv(tmp_path, index=index, na_rep=config.NA_TOKEN, encoding=config.CSV_ENCODING)
        _commit(tmp_path, filepath)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return filepath


def write_text(text: str, filepath: str) -> str:
    """テキストファイルをアトミックに書き出す"""
    tmp_path = _atomic_target(filepath)
    try:
        with open(tmp_path, 'w', encoding='utf-8') as f:
            f.write(text)
        _commit(tmp_path, filepath)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return filepath


def write_json(payload: dict, filepath: str) -> str:
    """JSONファイルをアトミックに書き出す"""
    return write_text(json.dumps(payload, indent=2, ensure_ascii=False) + '\n', filepath)


def write_dataset(data: Dataset, directory: str, prefix: str = '') -> Dict[str, str]:
    """
    データセットを X.csv・Z.csv・y.csv として書き出す

    欠測した応答は NA として書かれるため、load_dataset で同じ行列に戻る。

    Returns:
        {'X': パス, 'Z': パス（q = 0 なら None）, 'y': パス}
    """
    paths = {
        'X': os.path.join(directory, f'{prefix}X.csv'),
        'Z': os.path.join(directory, f'{prefix}Z.csv') if data.q else None,
        'y': os.path.join(directory, f'{prefix}y.csv'),
    }
    write_csv(pd.DataFrame(data.X, columns=data.predictor_names()), paths['X'])
    if paths['Z']:
        write_csv(pd.DataFrame(data.Z, columns=data.modifier_names()), paths['Z'])
    write_csv(pd.DataFrame({'y': data.y}), paths['y'])
    return paths


def calculate_sha256(filepath: str) -> str:
    """
    ファイルのSHA256ハッシュを計算

    Args:
        filepath: ハッシュを計算するファイルのパス

    Returns:
        SHA256ハッシュ値（16進数文字列）

    Raises:
        FileNotFoundError: ファイルが見つからない場合
        IOError: ファイル読み込みエラー
    """
    try:
        sha256_hash = hashlib.sha256()
        with open(filepath, 'rb') as f:
            # 大きなファイルに対応するため、チャンクで読み込む
            for byte_block in iter(lambda: f.read(4096), b""):
                sha256_hash.update(byte_block)
        return sha256_hash.hexdigest()
    except FileNotFoundError:
        raise FileNotFoundError(f"ファイルが見つかりません: {filepath}")
    except Exception as e:
        raise IOError(f"ハッシュ計算エラー: {filepath} - {str(e)}")


def write_table(frame: pd.DataFrame, directory: str, stem: str,
                formats=('csv',)) -> List[str]:
    """
    表を指定形式（csv / json）で書き出す

    Returns:
        書き出したファイルパスのリスト
    """
    paths = []
    if 'csv' in formats:
        paths.append(write_csv(frame, os.path.join(directory, f'{stem}.csv')))
    if 'json' in formats:
        text = frame.to_json(orient='records', indent=2, double_precision=15)
        paths.append(write_text(text + '\n', os.path.join(directory, f'{stem}.json')))
    return paths
