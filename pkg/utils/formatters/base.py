"""
运行报告格式化器
把结果记录、认证与体积估计整理成写到 stderr 的可读摘要。
"""

from typing import Any


class ReportFormatter:
    """基础报告格式化器"""

    @staticmethod
    def format_number(value: float, digits: int = 6) -> str:
        return f"{value:.{digits}g}"

    @staticmethod
    def format_certification(certification: Any) -> str:
        if certification is None:
            return "未认证"
        text = (
            f"{certification.verdict.value} (残差 {certification.equality_residual:.2e}, "
            f"Gram 最小特征值 {certification.min_gram_eigenvalue:.2e}, "
            f"采样最小值 {certification.sampled_constraint_min:.2e})"
        )
        if certification.margin is not None:
            text += f", ε = {certification.margin:.2e}"
        return text

    @staticmethod
    def format_record(record: Any) -> str:
        """一条求解记录的单行摘要"""
        head = f"k={record.k} 折扣={record.discount}: {record.status.value}"
        if record.approximation is None:
            return f"{head} ✗ {record.error or '无可用解'}"
        approximation = record.approximation
        return (
            f"{head}, d_k = {ReportFormatter.format_number(approximation.d_k, 8)}, "
            f"{record.iterations} 次迭代, {record.wall_time:.2f}s, "
            f"认证: {ReportFormatter.format_certification(approximation.certification)}"
        )

    @staticmethod
    def format_document(document: Any) -> str:
        lines = [f"结果文档 ({len(document.records)} 条记录, 版本 {document.version})"]
        lines += [f"  {ReportFormatter.format_record(r)}" for r in document.records]
        return "\n".join(lines)

    @staticmethod
    def format_volume(result: Any, label: str = "") -> str:
        prefix = f"{label} " if label else ""
        return (
            f"{prefix}体积 ≈ {ReportFormatter.format_number(result.volume_estimate)} "
            f"± {result.standard_error:.2g} (N={result.sample_count}, seed={result.seed})"
        )
