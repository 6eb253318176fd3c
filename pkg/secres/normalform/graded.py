"""
Series split by order in the masses.

Grade g collects the terms of size mu^g. A generating function carries its
own grade, a Poisson bracket adds the grades of its arguments, and every
term above ``max_grade`` is dropped as soon as it would be formed.
"""
from series.core import PoissonSeries, poisson_bracket, scale, series_sum, truncate


class GradedSeries:
    """Immutable mapping grade -> PoissonSeries, up to ``max_grade``."""

    __slots__ = ('parts', 'max_grade')

    def __init__(self, parts, max_grade=2):
        kept = {}
        for grade, series in parts.items():
            if grade < 0:
                raise ValueError('grades are non-negative')
            if grade <= max_grade and series is not None and not series.is_zero():
                kept[grade] = series
        object.__setattr__(self, 'parts', kept)
        object.__setattr__(self, 'max_grade', max_grade)

    def __setattr__(self, name, value):
        raise AttributeError('GradedSeries is immutable')

    def __getitem__(self, grade):
        return self.parts.get(grade)

    def part(self, grade, policy):
        """Series of one grade, or the zero series of ``policy``."""
        return self.parts.get(grade) or PoissonSeries.zero(policy)

    def grades(self):
        return sorted(self.parts)

    def total(self, policy, upto=None):
        upto = self.max_grade if upto is None else upto
        return series_sum([s for g, s in self.parts.items() if g <= upto], policy)

    def map(self, function):
        return GradedSeries({g: function(s) for g, s in self.parts.items()}, self.max_grade)

    def __repr__(self):
        sizes = ', '.join(f'{g}: {len(s)}' for g, s in sorted(self.parts.items()))
        return f'<GradedSeries {{{sizes}}}>'


def graded_lie_exp(chi, series, policies, chi_grade=1):
    """
    exp(L_chi) applied grade by grade:

        out[g] = sum over g0 + m * chi_grade = g of (1/m!) L_chi^m series[g0]

    ``policies`` maps each output grade to the truncation used when its
    terms are formed.
    """
    if chi_grade < 1:
        raise ValueError('generating functions have grade at least 1')
    max_grade = series.max_grade
    out = {g: [truncate(s, policies[g])] for g, s in series.parts.items()}
    if not chi.is_zero():
        for g0, term in series.parts.items():
            grade = g0
            for m in range(1, max_grade + 1):
                grade += chi_grade
                if grade > max_grade:
                    break
                term = scale(poisson_bracket(chi, term, policies[grade]), 1.0 / m)
                if term.is_zero():
                    break
                out.setdefault(grade, []).append(term)
    return GradedSeries(
        {g: series_sum(pieces, policies[g]) for g, pieces in out.items()}, max_grade,
    )

