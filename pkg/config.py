"""
設定ファイル
アプリケーション全体で使用する定数やパスを定義
"""
import os

# ベースディレクトリ
BASE_DIR = os.path.dirname(os.path.abspath(__file__))

# データディレクトリ（同梱フィクスチャ・再現ケース定義）
DATA_DIR = os.path.join(BASE_DIR, 'data')

# 出力ディレクトリ
OUTPUT_DIR = os.path.join(BASE_DIR, 'output')

# ログディレクトリ
LOG_DIR = os.path.join(BASE_DIR, 'logs')

# 再現ケース定義ファイル
REPRO_CASES_FILE = os.path.join(DATA_DIR, 'repro_cases.json')

# 同梱の合成OASIS形式データ
OASIS_FIXTURE_DIR = os.path.join(DATA_DIR, 'oasis_synthetic')

# CSV設定
NA_TOKEN = 'NA'          # 欠測値を表すトークン
CSV_ENCODING = 'utf-8'

# サンプラー設定
DEFAULT_N_ITER = 5000    # 反復回数
DEFAULT_BURN_IN = 500    # バーンイン
DEFAULT_THIN = 1         # 間引き
DEFAULT_SEED = 2025

# 事前分布のハイパーパラメータ
SIGMA0_SQ = 1.0          # 切片の事前分散
A0 = 1e-2                # σ² ~ IG(a0, b0)
B0 = 1e-2

# 数値計算の設定
REFRESH_EVERY = 100              # 残差・線形予測子を再計算する間隔
DRIFT_TOLERANCE = 1e-8           # 再計算時に許容するずれ
RIDGE_SCALES = (1e-8, 1e-6)      # Cholesky失敗時に加えるリッジの倍率
SIGMA_SQ_FLOOR = 1e-6            # σ²初期値の下限
PROGRESS_EVERY = 500             # DEBUGログを出す間隔

# 事後要約の設定
DEFAULT_LEVEL = 0.95     # 変数選択に使う信用区間の水準
SECONDARY_LEVEL = 0.90   # 交互作用の報告に使う水準
DEFAULT_ACF_MAX_LAG = 40

# シミュレーション設定
DEFAULT_P = 10
DEFAULT_Q = 4
DEFAULT_N = 200
DEFAULT_N_TEST = 50
DEFAULT_RHO_X = 0.5

# ベンチマーク・再現スイート設定
REPRO_REPLICATIONS = 20  # 机上規模の反復回数
WORKERS_ENV = 'HSP_THREADS'  # ワーカー数の既定値を上書きする環境変数

# ログ設定
LOG_LEVEL = 'INFO'
ERROR_LOG_FILE = os.path.join(LOG_DIR, 'error.log')
APP_LOG_FILE = os.path.join(LOG_DIR, 'app.log')
