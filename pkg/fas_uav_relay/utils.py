import hashlib
import logging

import numpy as np

log = logging.getLogger(__name__)


def setup_colored_logs():
    import coloredlogs

    logger = logging.getLogger()
    coloredlogs.install(
        level=logger.level,
        logger=logger,
        fmt="%(levelname)-8s [%(name)s] %(message)s",
    )


def progress_disabled():
    """
    Progress bars are only shown when the root logger lets INFO through.
    """
    return logging.getLogger().getEffectiveLevel() > logging.INFO


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype="float64") - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(np.asarray(watts, dtype="float64")) + 30.0


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype="float64") / 10.0)


def linear_to_db(linear):
    return 10.0 * np.log10(np.asarray(linear, dtype="float64"))


def text_hash(text, length=12):
    """
    Short sha256 digest of a text document, used to tag CSV outputs with the
    configuration they were produced from.
    """
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:length]


def write_csv(df, path, metadata=None):
    """
    Writes a dataframe as UTF-8 CSV, preceded by ``# key: value`` metadata lines.

    Parameters
    ----------
    df : pd.DataFrame
    path : str or None
        Output path. Returns the document as string if None.
    metadata : dict, optional
        Written in insertion order before the header.

    Returns
    -------
    str
        The complete CSV document.
    """
    lines = [f"# {key}: {value}\n" for key, value in (metadata or {}).items()]
    document = "".join(lines) + df.to_csv(index=False, lineterminator="\n")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(document)
        log.info(f"Wrote {len(df)} rows to {path}")
    return document
