from django.urls import path
from .views import (
    run_list,
    run_detail,
    run_results,
    run_table,
    morphscore_word,
    stats_correlation,
)


urlpatterns = [
    # Experiment runs
    path('runs/', run_list, name='run_list'),
    path('runs/<int:run_id>/', run_detail, name='run_detail'),
    path('runs/<int:run_id>/results/', run_results, name='run_results'),
    path('runs/<int:run_id>/table.csv', run_table, name='run_table'),

    # Metrics
    path('morphscore/word/', morphscore_word, name='morphscore_word'),
    path('stats/correlation/', stats_correlation, name='stats_correlation'),
]
