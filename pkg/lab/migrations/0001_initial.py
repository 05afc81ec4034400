# Generated by Django 5.2.8 on 2026-10-19 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=200)),
                ('manifest_path', models.CharField(max_length=500)),
                ('manifest', models.JSONField(blank=True, default=dict)),
                ('output_dir', models.CharField(max_length=500)),
                ('seed', models.IntegerField(default=0)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('finished', 'Finished'), ('failed', 'Finished with failures')], default='pending', max_length=20)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('failed_entries', models.JSONField(blank=True, default=list)),
            ],
            options={
                'verbose_name': 'Experiment run',
                'verbose_name_plural': 'Experiment runs',
                'ordering': ['-started_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='ConfigResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('position', models.PositiveIntegerField()),
                ('config_id', models.CharField(max_length=200)),
                ('family', models.CharField(choices=[('character', 'Character'), ('word', 'Word'), ('morphemic', 'Morphemic'), ('bpe', 'BPE'), ('unigram', 'Unigram LM')], max_length=20)),
                ('pre_tokenizer', models.CharField(choices=[('none', 'Whitespace only'), ('morfessor', 'MDL segmenter'), ('analyzer', 'Analyzer lexicon')], default='none', max_length=20)),
                ('vocab_size', models.PositiveIntegerField(blank=True, null=True)),
                ('status', models.CharField(choices=[('ok', 'OK'), ('failed', 'Failed')], default='ok', max_length=10)),
                ('error', models.TextField(blank=True, default='')),
                ('recall', models.FloatField(blank=True, null=True)),
                ('precision', models.FloatField(blank=True, null=True)),
                ('f1', models.FloatField(blank=True, null=True)),
                ('evaluated', models.PositiveIntegerField(blank=True, null=True)),
                ('ctc', models.BigIntegerField(blank=True, null=True)),
                ('renyi_entropy', models.FloatField(blank=True, null=True)),
                ('renyi_efficiency', models.FloatField(blank=True, null=True)),
                ('renyi_efficiency_observed', models.FloatField(blank=True, null=True)),
                ('model_path', models.CharField(blank=True, default='', max_length=500)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='results', to='lab.experimentrun')),
            ],
            options={
                'verbose_name': 'Configuration result',
                'verbose_name_plural': 'Configuration results',
                'ordering': ['run', 'position'],
                'constraints': [models.UniqueConstraint(fields=('run', 'config_id'), name='unique_config_per_run')],
            },
        ),
    ]
