from lab.management.base import LabCommand
from lab.stats import AnalysisTable, anova_two_way, correlate, nested_f, ols_fit


def _table_argument(parser):
    parser.add_argument('table', metavar='TABLE.csv')
    parser.add_argument('--out', default=None)


class Command(LabCommand):
    help = "Correlation, regression and ANOVA over an analysis table"

    def add_actions(self, subparsers):
        corr = subparsers.add_parser('corr', help="Pearson or Spearman correlation of two columns")
        corr.add_argument('--method', choices=['pearson', 'spearman'], default='pearson')
        corr.add_argument('--x', required=True)
        corr.add_argument('--y', required=True)
        _table_argument(corr)

        ols = subparsers.add_parser('ols', help="least-squares fit; wrap categorical columns as C(col)")
        ols.add_argument('--response', required=True)
        ols.add_argument('--terms', nargs='+', required=True)
        _table_argument(ols)

        anova = subparsers.add_parser('anova', help="two-way ANOVA with Type-II sums of squares")
        anova.add_argument('--response', required=True)
        anova.add_argument('--a', required=True)
        anova.add_argument('--b', required=True)
        anova.add_argument('--interaction', action='store_true')
        _table_argument(anova)

        nested = subparsers.add_parser('nested', help="F-test of a reduced model against a full model")
        nested.add_argument('--response', required=True)
        nested.add_argument('--reduced', nargs='+', required=True)
        nested.add_argument('--full', nargs='+', required=True)
        _table_argument(nested)

    def handle_corr(self, method, x, y, table, out, **options):
        self.write_json(correlate(AnalysisTable.read_csv(table), x, y, method).as_dict(), out)

    def handle_ols(self, response, terms, table, out, **options):
        self.write_json(ols_fit(AnalysisTable.read_csv(table), response, terms).as_dict(), out)

    def handle_anova(self, response, a, b, interaction, table, out, **options):
        result = anova_two_way(AnalysisTable.read_csv(table), response, a, b, interaction=interaction)
        self.write_json(result.as_dict(), out)

    def handle_nested(self, response, reduced, full, table, out, **options):
        self.write_json(nested_f(AnalysisTable.read_csv(table), response, reduced, full).as_dict(), out)
